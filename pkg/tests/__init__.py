"""Tests for the starcluster package."""
