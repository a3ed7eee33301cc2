from .index import INF, compute_index
from .mail import MessageMail
from .sequential import sequentialk_run

__all__ = ["INF", "MessageMail", "compute_index", "sequentialk_run"]
