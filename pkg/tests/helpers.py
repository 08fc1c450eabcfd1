"""Small builders shared across test modules."""

from qapkit import FeatureVector, Utterance

FV_DEFAULTS = dict(
    has_wh=False,
    has_or=False,
    has_inversion=False,
    has_tag=False,
    last_utt_similar=False,
    last_utt_incomplete=False,
    has_cliche=False,
    length=3,
)


def make_fv(**overrides) -> FeatureVector:
    values = dict(FV_DEFAULTS)
    values.update(overrides)
    return FeatureVector(**values)


def utt(text, turn=0, dialogue="d", speaker="A", interrupted=False) -> Utterance:
    return Utterance(dialogue, turn, speaker, text, interrupted)
