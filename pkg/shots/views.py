# shots/views.py
import logging
from pathlib import Path

from django.conf import settings
from django.http import JsonResponse
from django.views.decorators.csrf import csrf_exempt
from django.views.decorators.http import require_GET, require_POST

from .config import PipelineConfig
from .exceptions import ShotLabError
from .forms import ShotUploadForm
from .pipeline import score_sessions
from .template import read_model, read_template

logger = logging.getLogger(__name__)


def _artifact_paths():
    return Path(settings.KICKLAB_TEMPLATE_PATH), Path(settings.KICKLAB_MODEL_PATH)


def _load_artifacts():
    """(template, model) from the configured paths, or None when unusable."""
    template_path, model_path = _artifact_paths()
    if not (template_path.is_file() and model_path.is_file()):
        return None
    try:
        return read_template(template_path), read_model(model_path)
    except (OSError, ValueError, KeyError, ShotLabError) as e:
        logger.error("cannot load artifacts: %s", e)
        return None


# ----- Health -----

@require_GET
def health(request):
    template_path, model_path = _artifact_paths()
    return JsonResponse({
        "status": "ok",
        "template": template_path.is_file(),
        "model": model_path.is_file(),
    })


# ----- Score one uploaded session -----

@csrf_exempt
@require_POST
def score(request):
    form = ShotUploadForm(request.POST, request.FILES)
    if not form.is_valid():
        return JsonResponse({"ok": False, "errors": form.errors.get_json_data()}, status=400)

    artifacts = _load_artifacts()
    if artifacts is None:
        return JsonResponse({"ok": False, "error": "Template or model is not available."}, status=503)
    template, model = artifacts

    try:
        cfg = PipelineConfig.from_settings()
    except ShotLabError as e:
        logger.error("pipeline settings invalid: %s", e)
        return JsonResponse({"ok": False, "error": f"{e.code}: {e}"}, status=503)

    name = Path(request.FILES["file"].name or "upload").stem
    report = score_sessions([(name, form.session)], template, model, cfg, diagnostics=form.cleaned_data["diagnostics"])
    return JsonResponse(report.to_dict())
