"""Run configuration for gfftkit."""
