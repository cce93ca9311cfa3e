"""Tests for dioapprox."""
