import os

import hypothesis

hypothesis.settings.register_profile("kicklab", deadline=None, max_examples=50)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=5)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "kicklab"))
