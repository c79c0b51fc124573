"""Test suite for the Wild Data Toolkit."""
