"""Intent-driven storage tuning agent: traces, cache simulation, advisors,
policy IR, guardrails and a guarded control loop."""

__version__ = "0.1.0"
