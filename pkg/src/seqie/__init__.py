"""seqie: structured field extraction from documents via a QA seq2seq model."""

__version__ = "0.1.0"
