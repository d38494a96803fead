"""Shared fixtures and the acceptance summary hook."""

from __future__ import annotations

import pytest

from compzsl.config import RunConfig
from compzsl.packs import FeaturePack, SynthSpec, generate_synthetic
from support import ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def tiny_pack() -> FeaturePack:
    return generate_synthetic(SynthSpec(
        attribute_count=4, object_count=4, seen_count=8, unseen_count=4,
        images_per_composition=5, visual_dim=10, embed_dim=6, noise_std=0.1, seed=1,
    ))


@pytest.fixture()
def tiny_config() -> RunConfig:
    return RunConfig(seed=3, lr=1e-3, epochs=2, batch_size=8, latent_dim=8,
                     encoder_hidden=(12,), decoder_hidden=(12,), gcn_hidden=(8,))
