"""Unit tests for car_classifier."""
