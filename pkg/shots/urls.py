from django.urls import path

from . import views

app_name = "shots"

urlpatterns = [
    path("health/", views.health, name="health"),
    path("score/", views.score, name="score"),
]
