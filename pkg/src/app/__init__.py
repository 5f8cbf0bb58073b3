"""Command-line surface, configuration and experiment harness."""
