import math

import pytest

from irappendage import MotorModel, Stroke, TailParams, TaskSpec, TemplateParams
from irappendage.corpus import load_records

RHEX_TASK = TaskSpec(math.pi / 2, 0.34)


@pytest.fixture(scope="session")
def records():
    return load_records()


@pytest.fixture
def rhex_tail(records):
    return records["rhex-tail"].params(RHEX_TASK)


def make_template(xi=0.5, I_d=0.1, power=10.0, w_m=20.0, beta=1.0, theta=1.0, t_f=0.5,
                  stroke=None, t_s=None):
    stroke = stroke or Stroke.unbounded()
    return TemplateParams(xi, I_d, stroke, MotorModel(power, w_m, beta), t_s, TaskSpec(theta, t_f))


def make_tail(m_b=1.0, m_t=0.2, I_b=0.01, I_t=0.001, l_b=0.05, l_t=0.3, power=20.0, w_m=30.0,
              beta=1.0, theta=math.pi / 2, t_f=0.3, stroke=math.pi):
    return TailParams(m_b, m_t, I_b, I_t, l_b, l_t, Stroke.bounded(stroke),
                      MotorModel(power, w_m, beta), TaskSpec(theta, t_f))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.SUMMARY, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
