"""wordfeed: vocabulary microlearning injected into feeds and ad slots.

Engine modules: vocab (decks), filters (ad detection), scheduler (spaced
repetition), quizgen, placement (slot fitting, feed insertion),
analytics (event log, sessions, metrics), service + httpapi (event-sourced
HTTP study service), simulate (study-condition simulator).
"""

__version__ = "0.1.0"
