import hypothesis

hypothesis.settings.register_profile(
    "treeloss",
    deadline=None,
    max_examples=60,
    derandomize=True,
    print_blob=False,
)
hypothesis.settings.load_profile("treeloss")
