# src/config/statuses.py

STATUS_PROVED = "Proved"
STATUS_SATURATED = "Saturated"
STATUS_ITER_LIMIT = "IterLimit"
STATUS_NODE_LIMIT = "NodeLimit"
STATUS_TIME_LIMIT = "TimeLimit"

REPLAY_ACCEPTED = "accepted"
REPLAY_REJECTED = "rejected"
REPLAY_UNAVAILABLE = "unavailable"

EXIT_OK = 0
EXIT_UNPROVED = 1
EXIT_ERROR = 2
EXIT_UNVERIFIED = 3
