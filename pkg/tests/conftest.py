from fractions import Fraction as F

import pytest

from mcsched import Criticality, McTask, TaskSet


@pytest.fixture
def half_four_fifths_set() -> TaskSet:
    # U_L = 1/2, U_H = 4/5; estimates sum to C^L/T = 2/5 per HC task pair
    return TaskSet((
        McTask(1, F(10), F(5), Criticality.LC, alpha=F(0)),
        McTask(2, F(10), F(4), Criticality.HC, lc_estimate=F(2)),
        McTask(3, F(10), F(4), Criticality.HC, lc_estimate=F(2)),
    ))


@pytest.fixture
def contrast_set() -> TaskSet:
    # built so one degraded job's original deadline loses to the other
    # LC task's virtual deadline: x*T2 < T1 < T2
    return TaskSet((
        McTask(1, F(8), F(12, 5), Criticality.LC, alpha=F(1, 2)),
        McTask(2, F(10), F(2), Criticality.LC, alpha=F(1, 2)),
        McTask(3, F(5), F(3), Criticality.HC, lc_estimate=F(1)),
    ))
