"""Twirling channels, invariant bases, schedules and stabilizer averaging."""
