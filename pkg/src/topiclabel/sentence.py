"""Turn a topic's word list into the single sentence that gets embedded."""

from __future__ import annotations

from dataclasses import dataclass

from .core import Topic

SEPARATOR = ", "


@dataclass(frozen=True)
class TopicSentence:
    text: str


def build_sentence(topic: Topic) -> TopicSentence:
    """Join the topic words with ", " — byte-exact, no leading or trailing
    separator. Splitting on ", " recovers the word list as long as no word
    contains the separator itself (topic words never do; multiword graph
    nodes are not routed through here)."""
    return TopicSentence(SEPARATOR.join(topic.words))
