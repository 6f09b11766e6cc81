"""Tests for car_classifier."""
