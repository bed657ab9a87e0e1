"""Configuration, orchestration and reporting for runs and epsilon sweeps."""
