import numpy as np
import pytest

from ltlshield.geometry import Box, Polyhedron
from ltlshield.reach import (AffineDynamics, ControlLaw, GuardedRegion,
                             ProductSet, box_step_affine, product_in_region,
                             product_step, split_by_labels,
                             validate_high_assurance)
from ltlshield.sim import delorean_scenario

from helpers import E


@pytest.fixture(scope="module")
def car():
    return delorean_scenario("safe")


@pytest.fixture(scope="module")
def monitor(car):
    return car.monitor()


def brake():
    return ControlLaw.constant([-2.0])


def throttle():
    return ControlLaw.constant([2.0])


def test_interval_step_by_hand(car):
    img = box_step_affine(car.dynamics, Box([0, 1], [0.1, 1.2]),
                          ControlLaw.constant([1.0]), Box([0], [0.1]))
    assert np.allclose(img.lo, [0.25, 1.225])
    assert np.allclose(img.hi, [0.4, 1.45])


def test_point_step_equals_deterministic_successor(car):
    dyn = car.dynamics
    x = np.array([1.3, 0.7])
    u, d = np.array([0.5]), np.array([0.05])
    img = box_step_affine(dyn, Box.point(x), ControlLaw.constant(u),
                          Box.point(d))
    exact = dyn.step(x, u, d)
    assert np.all(img.lo == img.hi)
    assert np.allclose(img.lo, exact, atol=1e-12)


def test_velocity_clamp(car):
    img = box_step_affine(car.dynamics, Box([0, 0], [0, 0.1]), brake(),
                          Box([0], [0]))
    assert img.lo[1] == 0.0 and img.hi[1] == 0.0


def test_dimension_mismatch(car):
    with pytest.raises(ValueError):
        box_step_affine(car.dynamics, Box([0], [1]), brake())


def test_disturbance_must_respect_bound(car):
    with pytest.raises(ValueError):
        box_step_affine(car.dynamics, Box([0, 0], [1, 1]), brake(),
                        Box([-1], [1]))


def test_split_single_region(car):
    pieces = split_by_labels(Box([0, 0], [1, 1]), car.label_map)
    assert len(pieces) == 1
    letter, piece = pieces[0]
    assert letter == E
    assert np.allclose(piece.lo, [0, 0]) and np.allclose(piece.hi, [1, 1])


def test_split_across_both_thresholds(car):
    pieces = dict()
    for letter, piece in split_by_labels(Box([2.4, 1.8], [2.7, 2.1]),
                                         car.label_map):
        pieces[tuple(sorted(letter))] = piece
    assert set(pieces) == {(), ("tower",), ("fast",), ("fast", "tower")}
    assert np.allclose(pieces[()].hi, [2.54, 2.0])
    assert np.allclose(pieces[("fast", "tower")].lo, [2.54, 2.0])


def test_split_on_boundary_only_upper_regions(car):
    pieces = split_by_labels(Box([2.54, 0], [2.6, 1.0]), car.label_map)
    letters = {tuple(sorted(l)) for l, _ in pieces}
    assert ("tower",) in letters
    # The empty-label piece degenerates to the shared boundary line.
    for letter, piece in pieces:
        if letter == E:
            assert piece.lo[0] == piece.hi[0] == 2.54


def test_product_step_empty(car, monitor):
    out = product_step(ProductSet(), car.dynamics, brake(), car.label_map,
                       monitor)
    assert out.is_empty


def test_product_step_point_stays_inconclusive(car, monitor):
    r = ProductSet.from_point([0.0, 0.0], monitor.initial)
    out = product_step(r, car.dynamics, brake(), car.label_map, monitor)
    assert out.states() == [monitor.initial]
    box = out.boxes(monitor.initial)[0]
    assert box.hi[0] <= 0.1 and box.hi[1] == 0.0


def test_product_step_slow_crossing_reaches_bad_trap(car, monitor):
    r = ProductSet({monitor.initial: [Box([2.5, 0.5], [2.53, 0.6])]})
    out = product_step(r, car.dynamics, ControlLaw.constant([0.0]),
                       car.label_map, monitor)
    assert monitor.bot_state in out.states()


def test_product_step_exact_on_points(car, monitor):
    dyn = car.dynamics
    rng = np.random.default_rng(2)
    for _ in range(200):
        x = np.array([rng.uniform(0, 3), rng.uniform(0, 3)])
        u = np.array([rng.uniform(-2, 2)])
        d = np.array([rng.uniform(0, 0.2)])
        det = AffineDynamics(dyn.a, dyn.b, dyn.e, dyn.c, dyn.u_box,
                             Box.point(d), dyn.clamp_lo, dyn.clamp_hi)
        q = monitor.initial
        r = ProductSet.from_point(x, q)
        out = product_step(r, det, ControlLaw.constant(u), car.label_map,
                           monitor)
        exact = det.step(x, u, d)
        q_exact = monitor.step(q, car.label_map.letter_at(exact))
        assert out.contains(exact, q_exact)
        for qq in out.states():
            for box in out.boxes(qq):
                assert np.allclose(box.lo, box.hi, atol=1e-9)
                assert np.allclose(box.center, exact, atol=1e-12)


def test_product_step_monotone(car, monitor):
    inner = ProductSet({monitor.initial: [Box([1.0, 0.5], [1.2, 0.7])]})
    outer = ProductSet({monitor.initial: [Box([0.9, 0.4], [1.3, 0.8])]})
    law = throttle()
    r1 = product_step(inner, car.dynamics, law, car.label_map, monitor)
    r2 = product_step(outer, car.dynamics, law, car.label_map, monitor)
    for q in r1.states():
        assert q in r2.states()
        for box in r1.boxes(q):
            assert any(big.contains_box(box) for big in r2.boxes(q))


def test_subsumed_boxes_are_dropped():
    r = ProductSet()
    r.add("q0", Box([0, 0], [2, 2]))
    r.add("q0", Box([0.5, 0.5], [1, 1]))
    assert len(r.boxes("q0")) == 1
    r2 = ProductSet()
    r2.add("q0", Box([0.5, 0.5], [1, 1]))
    r2.add("q0", Box([0, 0], [2, 2]))
    assert len(r2.boxes("q0")) == 1


def test_product_in_region(car, monitor):
    sb = car.sb()
    assert product_in_region(ProductSet(), sb)
    top = monitor.top_state
    assert product_in_region(ProductSet({top: [Box([0, 0], [9, 9])]}), sb)
    bad = ProductSet({monitor.initial: [Box([2, 0], [2.2, 0.5])]})
    assert not product_in_region(bad, sb)  # support 2.018 > 1.66
    missing = ProductSet({monitor.bot_state: [Box([0, 0], [1, 1])]})
    assert not product_in_region(missing, sb)


def test_soundness_sampled_trajectories(car, monitor):
    # Random disturbed runs stay inside the propagated product set,
    # including the monitor component.
    dyn = car.dynamics
    lm = car.label_map
    rng = np.random.default_rng(9)
    init = Box([0.0, 0.0], [0.2, 0.3])
    laws = [throttle()] * 8
    tube = [None] * 9
    start = ProductSet()
    for letter, piece in split_by_labels(init, lm):
        start.add(monitor.step(monitor.initial, letter), piece)
    tube[0] = start
    for k, law in enumerate(laws):
        tube[k + 1] = product_step(tube[k], dyn, law, lm, monitor)
    for _ in range(500):
        x = rng.uniform(init.lo, init.hi)
        q = monitor.step(monitor.initial, lm.letter_at(x))
        assert tube[0].contains(x, q)
        for k, law in enumerate(laws):
            d = rng.uniform(dyn.d_box.lo, dyn.d_box.hi)
            x = dyn.step(x, law(x), d)
            q = monitor.step(q, lm.letter_at(x))
            assert tube[k + 1].contains(x, q), (k, x, q)


def test_validation_requires_positive_cell(car, monitor):
    with pytest.raises(ValueError):
        validate_high_assurance(car.sb(), brake(), car.dynamics,
                                car.label_map, monitor, cell=0.0,
                                frame=car.frame)


def test_validation_unbounded_without_frame(car, monitor):
    sb = GuardedRegion({monitor.initial: Polyhedron([[0.69, 1.0]], [1.66])})
    with pytest.raises(ValueError, match="unbounded"):
        validate_high_assurance(sb, brake(), car.dynamics, car.label_map,
                                monitor, cell=0.1)


def test_validation_empty_region_passes(car, monitor):
    report = validate_high_assurance(GuardedRegion({}), brake(), car.dynamics,
                                     car.label_map, monitor, cell=0.1,
                                     frame=car.frame)
    assert report.passed and report.cells_checked == 0


def test_validation_triangle_passes(car, monitor):
    report = validate_high_assurance(car.sb(), brake(), car.dynamics,
                                     car.label_map, monitor, cell=0.1,
                                     frame=car.frame)
    assert report.passed, str(report)


def test_validation_of_feedback_backups(car, monitor):
    # A dead-beat proportional brake keeps the triangle; a brake too weak
    # to counter the position drift does not (invariance needs the gain to
    # outweigh the creep term).
    deadbeat = ControlLaw.feedback([[0.0, -4.0]], [0.0])
    report = validate_high_assurance(car.sb(), deadbeat, car.dynamics,
                                     car.label_map, monitor, cell=0.05,
                                     frame=car.frame)
    assert report.passed, str(report)
    weak = ControlLaw.feedback([[0.0, -0.5]], [0.0])
    report = validate_high_assurance(car.sb(), weak, car.dynamics,
                                     car.label_map, monitor, cell=0.05,
                                     frame=car.frame)
    assert not report.passed


def test_feedback_step_is_exact_when_unsaturated(car):
    # The closed loop with an in-range feedback law propagates the box
    # through the combined state matrix; sampled points confirm tightness.
    law = ControlLaw.feedback([[0.0, -1.0]], [0.5])
    box = Box([1.0, 0.4], [1.2, 0.6])
    img = box_step_affine(car.dynamics, box, law, Box([0.1], [0.1]))
    rng = np.random.default_rng(0)
    seen_lo = np.full(2, np.inf)
    seen_hi = np.full(2, -np.inf)
    for _ in range(4000):
        x = rng.uniform(box.lo, box.hi)
        nxt = car.dynamics.step(x, law(x), np.array([0.1]))
        assert img.contains_point(nxt)
        seen_lo = np.minimum(seen_lo, nxt)
        seen_hi = np.maximum(seen_hi, nxt)
    assert np.allclose(seen_lo, img.lo, atol=5e-3)
    assert np.allclose(seen_hi, img.hi, atol=5e-3)


def test_validation_inflated_region_fails(car, monitor):
    sb = GuardedRegion({monitor.top_state: Polyhedron.trivial(2),
                        monitor.initial: Polyhedron([[0.69, 1.0]], [3.0])})
    report = validate_high_assurance(sb, brake(), car.dynamics, car.label_map,
                                     monitor, cell=0.1, frame=car.frame)
    assert not report.passed
    crossers = [w for w in report.witnesses
                if "excluded monitor state" in w.reason]
    assert crossers, "expected a witness crossing the threshold too slowly"
    assert any(w.cell.hi[0] >= 2.54 and w.cell.lo[1] < 2.0
               for w in crossers)
