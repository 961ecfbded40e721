import dataclasses

import numpy as np
import pytest

from sklf.exceptions import EmptySplitError
from sklf.training import evaluate, init_train_state, render_views


@pytest.fixture
def model(occluder_dataset, tiny_config):
    return init_train_state(occluder_dataset, tiny_config).model.with_progress(2.0)


def test_report_lists_holdout_views(model, occluder_dataset):
    report = evaluate(model, occluder_dataset)
    assert report.split == "holdout"
    assert report.views == [7]
    assert np.isfinite(report.mean_psnr)
    assert -1.0 <= report.mean_ssim <= 1.0


def test_evaluation_is_deterministic(model, occluder_dataset):
    first = evaluate(model, occluder_dataset, "all")
    second = evaluate(model, occluder_dataset, "all", n_jobs=2)
    assert first.views == list(range(9))
    assert first.psnr == second.psnr
    assert first.ssim == second.ssim


def test_render_views(model, occluder_dataset):
    images = render_views(model, occluder_dataset, np.array([4, 0]))
    assert len(images) == 2
    assert images[0].shape == (12, 12, 3)
    assert not np.array_equal(images[0], images[1])


def test_empty_split(model, occluder_dataset):
    no_holdout = dataclasses.replace(
        occluder_dataset, holdout=np.zeros(9, dtype=bool)
    )
    with pytest.raises(EmptySplitError) as exc_info:
        evaluate(model, no_holdout)

    assert "contains no views" in str(exc_info)
