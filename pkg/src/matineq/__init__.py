"""Seeded numerical checks of symmetric-norm inequalities for matrix functions."""
