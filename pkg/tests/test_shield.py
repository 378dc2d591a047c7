import numpy as np
import pytest
from dataclasses import replace

from ltlshield.geometry import Polyhedron
from ltlshield.reach import ControlLaw, GuardedRegion
from ltlshield.shield import (Mode, NotInHighAssurance, NotSafetyFormula,
                              RecoverySequence, StepVerdict, new_session,
                              recovery, recovery_d, session_step)
from ltlshield.sim import delorean_scenario, make_driver, simulate


def hold(u: float, n: int = 9):
    return lambda: iter([ControlLaw.constant([u])] * n)


def empty_source():
    return lambda: iter(())


@pytest.fixture(scope="module")
def det_cfg():
    return delorean_scenario("safe", deterministic=True).config()


@pytest.fixture(scope="module")
def cfg():
    return delorean_scenario("safe").config()


def triangle_only(cfg_like):
    sb = GuardedRegion(
        {cfg_like.monitor.initial: Polyhedron([[0.69, 1.0]], [1.66])})
    return replace(cfg_like, sb=sb)


class TestRecoveryDeterministic:
    def test_brake_inside_region_is_length_one(self, det_cfg):
        seq = recovery(np.array([0.5, 0.5]), det_cfg.monitor.initial,
                       hold(-2.0), det_cfg)
        assert seq is not None and len(seq) == 1

    def test_full_throttle_never_reenters_triangle(self, det_cfg):
        # One throttle step from (0, 1.2) leaves the braking triangle and
        # the plan never returns, so the bound is exhausted.  From rest the
        # same plan re-enters trivially after one step.
        cfg = triangle_only(det_cfg)
        seq = recovery(np.array([0.0, 1.2]), cfg.monitor.initial,
                       hold(2.0), cfg)
        assert seq is None
        seq0 = recovery(np.array([0.0, 0.0]), cfg.monitor.initial,
                        hold(2.0), cfg)
        assert seq0 is not None and len(seq0) == 1

    def test_full_throttle_verifies_via_good_trap(self, det_cfg):
        # With the good trap admitted, flooring it crosses fast.
        seq = recovery(np.array([0.0, 0.0]), det_cfg.monitor.initial,
                       hold(2.0), det_cfg)
        assert seq is not None

    def test_proposal_entering_bad_trap_is_rejected(self, det_cfg):
        seq = recovery(np.array([2.45, 0.3]), det_cfg.monitor.initial,
                       hold(0.0), det_cfg)
        assert seq is None

    def test_input_outside_admissible_set_is_fault(self, det_cfg):
        seq = recovery(np.array([0.5, 0.5]), det_cfg.monitor.initial,
                       hold(-5.0), det_cfg)
        assert seq is None

    def test_exhausted_source_is_fault(self, det_cfg):
        seq = recovery(np.array([0.5, 0.5]), det_cfg.monitor.initial,
                       empty_source(), det_cfg)
        assert seq is None

    def test_requires_deterministic_mode(self, cfg):
        with pytest.raises(ValueError):
            recovery(np.array([0.0, 0.0]), cfg.monitor.initial,
                     hold(-2.0), cfg)


class TestRecoveryDisturbed:
    def test_domain_excluding_state_faults_immediately(self, cfg):
        law = ControlLaw.constant(
            [-2.0], domain=Polyhedron([[1.0, 0.0]], [-1.0]))  # x <= -1
        seq = recovery_d(np.array([0.5, 0.5]), cfg.monitor.initial,
                         lambda: iter([law] * 9), cfg)
        assert seq is None

    def test_brake_inside_triangle_is_length_one(self, cfg):
        seq = recovery_d(np.array([0.5, 0.5]), cfg.monitor.initial,
                         hold(-2.0), cfg)
        assert seq is not None and len(seq) == 1
        assert len(seq.tube) == 2

    def test_full_throttle_tube_exits_triangle_forever(self, cfg):
        seq = recovery_d(np.array([0.0, 1.2]), cfg.monitor.initial,
                         hold(2.0), triangle_only(cfg))
        assert seq is None

    def test_sequence_is_never_empty(self):
        with pytest.raises(ValueError):
            RecoverySequence(())


class TestNewSession:
    def test_case_study_origin(self, cfg):
        s = new_session(cfg, [0.0, 0.0])
        assert s.mode == Mode.NOMINAL and s.tick == 0
        assert s.q == cfg.monitor.initial and s.in_sb()

    def test_start_past_threshold_is_rejected(self, cfg):
        with pytest.raises(NotInHighAssurance):
            new_session(cfg, [3.0, 0.0])

    def test_non_safety_formula_rejected(self, cfg):
        sc = delorean_scenario("safe")
        bad = replace(sc, formula_text="F tower")
        with pytest.raises(NotSafetyFormula):
            new_session(bad.config(), [0.0, 0.0])
        # explicit override is allowed
        s = new_session(bad.config(allow_non_safety=True), [0.0, 0.0])
        assert s.mode == Mode.NOMINAL

    def test_config_rejects_bad_trap_in_region(self, cfg):
        m = cfg.monitor
        sb = GuardedRegion({m.bot_state: Polyhedron.trivial(2)})
        with pytest.raises(ValueError):
            replace(cfg, sb=sb)

    def test_deterministic_mode_needs_point_disturbance(self, cfg):
        with pytest.raises(ValueError):
            replace(cfg, deterministic=True)


class TestSessionStep:
    def test_verified_proposal_is_accepted(self, cfg):
        s = new_session(cfg, [0.0, 0.0])
        d = session_step(s, hold(-2.0), np.array([0.1]))
        assert d.verdict == StepVerdict.ACCEPTED
        assert d.mode == Mode.NOMINAL
        assert d.applied[0] == -2.0

    def test_fault_applies_memorized_law_not_proposal(self):
        sc = delorean_scenario("faulty-late")
        cfg = sc.config()
        s = new_session(cfg, [0.0, 0.0])
        driver = make_driver("faulty-late", sc)
        rng = np.random.default_rng(0)
        verdicts = []
        for tick in range(6):
            d = session_step(s, driver(tick, s.x, s.q), np.array([0.1]))
            verdicts.append((d.verdict, float(d.applied[0])))
        assert verdicts[0][0] == StepVerdict.ACCEPTED
        fault = next(v for v in verdicts if v[0] == StepVerdict.FAULT)
        # the faulty proposal was a coast (0.0); memory holds full throttle
        assert fault[1] == 2.0

    def test_backup_forever_after_memory_runs_dry(self, cfg):
        s = new_session(cfg, [0.0, 0.0])
        session_step(s, hold(-2.0), np.array([0.1]))   # accepted, 1-law plan
        d = session_step(s, empty_source(), np.array([0.1]))
        assert d.verdict == StepVerdict.FAULT and d.mode == Mode.BACKUP
        for _ in range(20):
            d = session_step(s, hold(2.0), np.array([0.1]))
            assert d.verdict == StepVerdict.BACKUP
            assert s.in_sb()

    def test_backup_invariance_without_reengage(self):
        sc = delorean_scenario("faulty-late")
        cfg = sc.config()
        s = new_session(cfg, [0.0, 0.0], debug=True)
        driver = make_driver("faulty-late", sc)
        rng = np.random.default_rng(4)
        entered_backup = False
        for tick in range(120):
            d = session_step(s, driver(tick, s.x, s.q),
                             rng.uniform(cfg.dynamics.d_box.lo,
                                         cfg.dynamics.d_box.hi))
            if s.mode == Mode.BACKUP:
                entered_backup = True
            if entered_backup:
                assert s.in_sb()
        assert entered_backup

    def test_memory_validity_replay_in_debug(self):
        # debug mode re-verifies the memorized remainder before consuming it
        tr = simulate(delorean_scenario("faulty-late"), seed=11, ticks=60,
                      debug=True)
        assert not tr.summary.bot_reached

    def test_reengage_restores_nominal(self):
        sc = delorean_scenario("faulty-late", reengage=True)
        s = new_session(sc.config(), [0.0, 0.0])
        driver = make_driver("faulty-late", sc)
        rng = np.random.default_rng(8)
        saw_fault = False
        reaccepted = False
        for tick in range(60):
            d = session_step(s, driver(tick, s.x, s.q),
                             rng.uniform(sc.dynamics.d_box.lo,
                                         sc.dynamics.d_box.hi))
            saw_fault = saw_fault or d.verdict == StepVerdict.FAULT
            if saw_fault and d.verdict == StepVerdict.ACCEPTED:
                reaccepted = True
        assert saw_fault and reaccepted
        assert s.q == sc.monitor().top_state

    def test_disturbance_outside_bound_rejected(self, cfg):
        s = new_session(cfg, [0.0, 0.0])
        with pytest.raises(ValueError):
            session_step(s, hold(-2.0), np.array([0.5]))


def test_deterministic_subsumption_small():
    det = delorean_scenario("faulty-late", deterministic=True)
    alg1 = simulate(det, seed=5, ticks=120)
    alg3 = simulate(replace(det, deterministic=False), seed=5, ticks=120)
    assert alg1.records == alg3.records
