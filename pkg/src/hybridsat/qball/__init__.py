"""Reversible circuits for QBall: a register machine, the circuit builder and a plain reference model."""
