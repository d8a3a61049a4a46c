"""Training a single NER model from datasets annotated with different entity types."""
from .labels import EntitySpan, LabelSpace

__version__ = "0.1.0"

__all__ = ["EntitySpan", "LabelSpace", "__version__"]
