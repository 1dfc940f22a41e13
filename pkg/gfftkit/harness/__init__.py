"""Verification harness: Monte-Carlo, quadrature oracles and verifiers."""
