"""gridwatch: a monitoring daemon for grid operation centers.

Checks hosts and services on a schedule, classifies failures through the
host parent topology (DOWN vs UNREACHABLE), escalates notifications to
contact groups, keeps round-robin metric history, retains state across
restarts, and serves a VO-centric status API for the operations console.
"""

__version__ = "0.1.0"
