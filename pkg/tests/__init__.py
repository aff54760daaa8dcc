"""Unit tests for gci-toolkit package."""
