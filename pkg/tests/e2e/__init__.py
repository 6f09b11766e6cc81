"""End-to-end CLI tests for car_classifier."""
