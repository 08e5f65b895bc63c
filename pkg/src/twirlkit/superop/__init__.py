"""Superoperator forms of the twirl and their closed-form error laws."""
