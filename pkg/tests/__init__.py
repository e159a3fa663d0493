"""Tests for the nmr-bell simulator."""
