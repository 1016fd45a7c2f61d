"""Dataset handling, experiment configs, the CV harness and the CLI."""
