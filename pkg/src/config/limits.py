# src/config/limits.py

ITER_LIMIT = 30
NODE_LIMIT = 10_000
TIME_LIMIT_MS = 5_000
EXPLAIN_GRACE = 3

ORACLE_MAX_DEPTH = 8
ORACLE_MAX_TERM_SIZE = 40
ORACLE_MAX_STATES = 50_000
