# shots/forms.py
from django import forms
from django.conf import settings

from .exceptions import ShotLabError
from .ingest import parse_csv_log


# ---------- SHOT UPLOAD ----------

class ShotUploadForm(forms.Form):
    """One CSV sensor log, parsed during validation."""

    file = forms.FileField()
    diagnostics = forms.BooleanField(required=False)

    def clean_file(self):
        upload = self.cleaned_data["file"]

        limit = getattr(settings, "FILE_UPLOAD_MAX_MEMORY_SIZE", 2 * 1024 * 1024)
        if upload.size > limit:
            raise forms.ValidationError(f"File is larger than {limit} bytes.")

        name = (upload.name or "").lower()
        if name and not name.endswith((".csv", ".txt")):
            raise forms.ValidationError("Upload a CSV sensor log (.csv).")

        try:
            session = parse_csv_log(upload.read())
        except ShotLabError as e:
            raise forms.ValidationError(f"{e.code}: {e}")

        self.cleaned_data["session"] = session
        return upload

    @property
    def session(self):
        return self.cleaned_data.get("session")
