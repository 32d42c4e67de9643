from django.urls import path, include

urlpatterns = [
    # ----- Shot scoring API -----
    path("api/", include(("shots.urls", "shots"), namespace="shots")),
]
