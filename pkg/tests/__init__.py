"""Tests for the Whitham flow-map toolkit."""
