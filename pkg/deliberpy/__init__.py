"""DeliberPy - multilingual two-pass speech recognition with deliberation rescoring."""

__version__ = "0.1.0"
