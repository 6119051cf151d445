import hypothesis

# derandomized so the suite is reproducible run to run
hypothesis.settings.register_profile(
    "package", derandomize=True, deadline=None, max_examples=100
)
hypothesis.settings.load_profile("package")
