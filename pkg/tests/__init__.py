"""Tests for the fermiq package."""
