"""Knowledge diffusion on an adaptive question-answer network with random-topic control."""

__version__ = "0.1.0"
