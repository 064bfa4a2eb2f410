import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from halfliouville import blowup as bl
from halfliouville import curves as cv
from halfliouville import spectral as sp
from halfliouville.spectral import TWO_PI

POLES = [np.pi / 2, -np.pi / 2]


@pytest.fixture(scope="module")
def two_pole():
    return bl.generate_family(bl.FamilySpec("two_pole", (0.3, 0.1, 0.03, 0.01)))


@pytest.fixture(scope="module")
def circle():
    return bl.generate_family(bl.FamilySpec("moebius_pullback", (0.9, 0.99, 0.999)))


def _unit(z):
    return np.ones_like(np.asarray(z, dtype=complex))


# -------------------------------------------------------------- family specs

def test_family_spec_validation():
    with pytest.raises(bl.BlowupError):
        bl.FamilySpec("spiral", (0.1, 0.2))
    with pytest.raises(bl.BlowupError, match="monotone"):
        bl.FamilySpec("two_pole", (0.3, 0.1, 0.2))
    with pytest.raises(bl.BlowupError):
        bl.FamilySpec("moebius_pullback", (0.5, 1.0))
    with pytest.raises(bl.BlowupError):
        bl.FamilySpec("moebius_pullback", (0.5,), direction=2.0)
    with pytest.raises(bl.BlowupError):
        bl.FamilySpec("two_pole", (-0.1,))
    with pytest.raises(bl.BlowupError):
        bl.FamilySpec("custom", (1, 2), factors=(np.zeros(8),))


def test_zero_parameter_pullback_is_circle():
    (m,) = bl.generate_family(bl.FamilySpec("moebius_pullback", (0.0,), n=64))
    assert np.max(np.abs(m.lam.lam)) < 1e-15
    assert np.allclose(m.kappa, 1.0)


def test_large_delta_is_diffuse():
    (m,) = bl.generate_family(bl.FamilySpec("two_pole", (1.0,)))
    prof = bl.mass_profile(m.lam, m.kappa, POLES, 0.3)
    assert all(a.mass < 0.5 * np.pi for a in prof.arcs)


def test_means_decrease_along_two_pole(two_pole):
    means = [m.lam.mean for m in two_pole]
    assert np.all(np.diff(means) < 0)
    assert all(m.residual_sup < 1e-12 for m in two_pole)


def test_members_are_resolved(circle, two_pole):
    for m in circle + two_pole:
        assert sp.tail_energy_fraction(m.lam.lam) <= 1e-16
    assert circle[-1].lam.n > circle[0].lam.n


# ------------------------------------------------------------ two-pole maps

def test_two_pole_constant_against_quadrature():
    for d, frozen in ((0.3, 1.5217825565018344), (0.01, 0.5291607558274202)):
        R = 1 + d
        q = integrate.quad(lambda t: 1 / abs(np.exp(2j * t) + R * R), 0, TWO_PI,
                           limit=500, epsabs=1e-13, epsrel=1e-13)[0]
        assert bl.two_pole_constant(d) == pytest.approx(TWO_PI / q, rel=1e-12)
        assert bl.two_pole_constant(d) == pytest.approx(frozen, rel=1e-13)


def test_two_pole_primitive_derivative():
    d = 0.05
    phi, dphi = bl.two_pole_primitive(d), bl.two_pole_derivative(d)
    z = np.array([0.3 + 0.2j, -0.5j, 0.9, -0.7 + 0.1j])
    h = 1e-5
    fd = (phi(z + h) - phi(z - h)) / (2 * h)
    assert np.max(np.abs(fd - dphi(z))) < 1e-8
    assert abs(phi(1.0)) < 1e-15


def test_two_pole_length_is_two_pi(two_pole):
    for m in two_pole:
        assert m.lam.length == pytest.approx(TWO_PI, abs=1e-12)


# ------------------------------------------------------------- mass profiles

def test_mass_profile_shrinking_arcs(two_pole):
    for m in two_pole:
        prof = bl.mass_profile(m.lam, m.kappa, POLES, min(2 * m.param, 1.0))
        assert prof.total == pytest.approx(TWO_PI, abs=1e-10)
        # mirror symmetry between the poles
        assert prof.arcs[0].mass == pytest.approx(prof.arcs[1].mass, rel=1e-12)


def test_mass_profile_overlap():
    with pytest.raises(bl.BlowupError, match="overlap"):
        bl.mass_profile(np.zeros(64), np.ones(64), [0.0, 0.5], 0.3)


def test_circle_arc_mass_matches_closed_form(circle):
    # pullback of the circle: the arc mass is the length of the image arc
    for m in circle:
        a = complex(m.param)
        mp = cv.MoebiusMap(a)
        exact = mp.boundary_angle(0.3) - mp.boundary_angle(-0.3)
        got = bl.mass_profile(m.lam, m.kappa, [0.0], 0.3).arcs[0].mass
        assert got == pytest.approx(exact, abs=1e-9)


def test_mass_trends(circle, two_pole):
    cm = [bl.mass_profile(m.lam, m.kappa, [0.0], 0.3).arcs[0].mass for m in circle]
    assert np.all(np.diff(cm) > 0) and cm[-1] < TWO_PI
    pm = [bl.mass_profile(m.lam, m.kappa, POLES, 0.3).arcs[0].mass for m in two_pole]
    assert np.all(np.diff(pm) > 0) and pm[-1] < np.pi
    assert bl.richardson([0.03, 0.01], pm[2:]) == pytest.approx(np.pi, rel=1e-3)


@given(st.floats(-5, 5), st.floats(-3, 3), st.floats(0.01, 0.5), st.floats(0.6, 2.0))
def test_richardson_exact_on_linear_data(v_inf, c, h1, ratio):
    h = np.array([h1 * ratio, h1])
    assert bl.richardson(h, v_inf + c * h) == pytest.approx(v_inf, abs=1e-9)
    assert bl.richardson(1 - h, v_inf + c * h, limit=1.0) == pytest.approx(v_inf, abs=1e-9)


# ----------------------------------------------------------- limit profiles

def test_limit_profile_self_check():
    th = sp.grid(1024)
    keep = np.minimum(bl._circ_dist(th, POLES[0]), bl._circ_dist(th, POLES[1])) >= 0.3
    w = np.zeros(th.size)
    w[keep] = bl.limit_profile(th[keep], "ii", POLES)
    # the error is taken after removing the mean, so shifts do not matter
    e0 = bl.limit_profile_error(w, "ii", POLES, 0.3)
    assert bl.limit_profile_error(w + 5.0, "ii", POLES, 0.3) == pytest.approx(e0, abs=1e-12)
    assert e0 == pytest.approx(abs(np.mean(w)), abs=1e-12)


def test_limit_profiles_have_zero_mean():
    th = sp.grid(4096)
    # v_inf = -log|e^{it} - e^{ip}|^2 integrates to zero on the circle
    for p in (0.0, 1.0):
        v = bl.limit_profile(th + 0.5 * TWO_PI / 4096, "i", [p])
        assert abs(np.mean(v)) < 1e-3
    with pytest.raises(bl.BlowupError):
        bl.limit_profile(th, "iii", [0.0])
    with pytest.raises(bl.BlowupError):
        bl.limit_profile_error(np.zeros(8), "i", [0.0], 0.0)


def test_limit_profile_errors_decrease(circle, two_pole):
    ce = [bl.limit_profile_error(m.lam, "i", [0.0], 0.3) for m in circle]
    pe = [bl.limit_profile_error(m.lam, "ii", POLES, 0.3) for m in two_pole]
    assert np.all(np.diff(ce) < 0) and ce[-1] < 5e-3
    assert np.all(np.diff(pe) < 0) and pe[-1] < 0.02


# --------------------------------------------------------------------- mesh

@pytest.fixture(scope="module")
def mesh4():
    return bl.disk_mesh(4)


def test_mesh_structure(mesh4):
    b = mesh4.vertices[mesh4.boundary]
    assert np.max(np.abs(np.abs(b) - 1.0)) < 1e-15
    assert mesh4.boundary.sum() == 6 * 4 * 2 ** 4
    assert np.all(np.abs(mesh4.vertices) <= 1.0 + 1e-15)
    with pytest.raises(bl.BlowupError):
        mesh4.boundary_vertex(0.5)


def test_mesh_distances_approximate_chords(mesh4):
    rng = np.random.default_rng(0)
    a = rng.uniform(0, TWO_PI, 6)
    m, idx = mesh4.with_boundary_points(a)
    D = bl.distance_matrix(_unit, m, idx)
    chord = np.abs(np.exp(1j * a)[:, None] - np.exp(1j * a)[None, :])
    off = chord > 0
    assert np.all(D[off] >= chord[off] * (1 - 1e-12))
    assert np.max(D[off] / chord[off] - 1) < 0.01
    # diameter
    m, _ = mesh4.with_boundary_points([0.0, np.pi])
    assert bl.geodesic_distance(_unit, m, 1.0, -1.0) == pytest.approx(2.0, rel=1e-12)


def test_mesh_refinement_changes_little(mesh4):
    a = np.array([0.1, 1.3, 2.9, 4.4])
    m4, i4 = mesh4.with_boundary_points(a)
    m5, i5 = bl.disk_mesh(5).with_boundary_points(a)
    d4 = bl.distance_matrix(_unit, m4, i4)
    d5 = bl.distance_matrix(_unit, m5, i5)
    off = d5 > 0
    assert np.max(np.abs(d4 - d5)[off] / d5[off]) <= 0.02


def test_distance_axioms(two_pole, mesh4):
    a = np.array([0.2, 1.0, 2.5, 3.3, 5.0])
    m, idx = mesh4.with_boundary_points(a)
    imm = two_pole[1].immersion
    D = bl.distance_matrix(imm, m, idx)
    assert np.allclose(D, D.T, rtol=0, atol=1e-12)
    assert np.all(np.diag(D) == 0)
    for i in range(5):
        for j in range(5):
            assert np.all(D[i, j] <= D[i, :] + D[:, j] + 1e-12)
    # the image distance dominates the chord of the image points
    pts = imm(np.exp(1j * a))
    assert np.all(D + 1e-12 >= np.abs(pts[:, None] - pts[None, :]))


def test_geodesic_path_and_turning(two_pole, mesh4):
    imm = two_pole[0].immersion
    m, _ = mesh4.with_boundary_points([0.0, np.pi])
    path = bl.geodesic_path(imm, m, 1.0, -1.0)
    assert path[0] == pytest.approx(1.0) and path[-1] == pytest.approx(-1.0)
    length = np.sum(bl.edge_lengths(imm.derivative, path[:-1], path[1:]))
    assert length == pytest.approx(bl.geodesic_distance(imm, m, 1.0, -1.0), rel=1e-12)
    assert cv.polyline_turning(path) < np.pi


def test_edge_lengths_near_pole():
    # int_0^1 dx / (1 + eps - x) = log((1 + eps)/eps)
    eps = 1e-4
    got = bl.edge_lengths(lambda z: 1 / (1 + eps - z), [0.0], [1.0])[0]
    assert got == pytest.approx(np.log((1 + eps) / eps), rel=1e-9)


def test_two_pole_distance_closed_form(two_pole, mesh4):
    # Phi_delta is real and increasing on [-1, 1] and maps the disk onto a
    # convex domain, so D(1, -1) equals 2 c / R arctan(1 / R)
    m, _ = mesh4.with_boundary_points([0.0, np.pi])
    frozen = [1.535117179059872, 1.2431167064822641, 0.9868107930070342, 0.8177609245807486]
    for mem, f in zip(two_pole, frozen):
        R = 1 + mem.param
        exact = 2 * bl.two_pole_constant(mem.param) / R * np.arctan(1 / R)
        assert exact == pytest.approx(f, rel=1e-12)
        assert bl.geodesic_distance(mem.immersion, m, 1.0, -1.0) == pytest.approx(exact, rel=1e-9)


# ---------------------------------------------------------- pinched points

def test_detect_pinched_needs_three_members():
    fam = bl.generate_family(bl.FamilySpec("two_pole", (0.3, 0.1)))
    with pytest.raises(bl.BlowupError):
        bl.detect_pinched(fam)


def test_detect_pinched_needs_immersions():
    fam = bl.generate_family(bl.FamilySpec("custom", (1, 2, 3), factors=(np.zeros(64),) * 3))
    with pytest.raises(bl.BlowupError, match="immersion"):
        bl.detect_pinched(fam)


def test_no_pinching_for_constant_family():
    spec = bl.FamilySpec("moebius_pullback", (0.0, 1e-9, 2e-9))
    fam = bl.generate_family(spec)
    assert bl.detect_pinched(fam, level=3) == []


def test_no_pinching_for_circle_family(circle):
    # every member is a parametrisation of the unit circle
    assert bl.detect_pinched(circle, level=4) == []


def test_two_pole_pinched_pair(two_pole):
    pairs = bl.detect_pinched(two_pole, level=4)
    assert len(pairs) == 1
    p = pairs[0]
    assert {p.s, p.s_dual} == {0.0, 0.5}
    assert abs(p.angle - np.pi) <= 0.05
    assert np.all(np.diff(p.distances) < 0)


# ------------------------------------------------- pullback of a solved factor

def test_pullback_of_nonconstant_factor_concentrates_full_mass():
    th = sp.grid(256)
    lam0 = 0.2 * np.cos(th) + 0.1 * np.sin(2 * th)
    k0 = cv.curvature_from_factor(lam0)
    fam = bl.generate_family(bl.FamilySpec("moebius_pullback", (0.9, 0.99, 0.999),
                                           base=lam0, kappa=k0))
    means = [m.lam.mean for m in fam]
    masses = [bl.mass_profile(m.lam, m.kappa, [0.0], 0.3).arcs[0].mass for m in fam]
    assert np.all(np.diff(means) < -1.0)
    # the whole mass 2 pi collapses to one point, as for the circle
    assert bl.richardson([0.99, 0.999], masses[1:], limit=1.0) == pytest.approx(TWO_PI, rel=0.01)
    assert all(m.residual_sup < 1e-6 for m in fam)


# ------------------------------------------------------- Schwarz-Christoffel

def test_sc_profile_closed_form():
    # for alpha = pi/2, V = -i (w(z) - w(0)) with w^2 = (z - i)/(z + i)
    p = bl.SCProfile(np.pi / 2)
    w0 = 1 / (p.derivative(0.0) * 1j ** 2)
    for z in (0.5, -0.5, 0.5j, 0.3 - 0.6j):
        w = 1 / (p.derivative(z) * (z + 1j) ** 2)
        assert w ** 2 == pytest.approx((z - 1j) / (z + 1j), abs=1e-13)
        assert p.value(z) == pytest.approx(-1j * (w - w0), abs=1e-10)


@pytest.mark.parametrize("alpha", [np.pi / 3, np.pi / 2, np.pi])
def test_sc_profile_straight_sides_and_corner(alpha):
    p = bl.SCProfile(alpha)
    gap = 1e-3
    arc = np.linspace(-np.pi / 2 + gap, np.pi / 2 - gap, 101)
    for a in (arc, arc + np.pi):
        t = p.boundary_tangent(a)
        assert np.max(np.abs(np.angle(t / t[0]))) < 1e-12
    eta = 1e-5
    jump = np.angle(p.boundary_tangent(np.pi / 2 + eta) / p.boundary_tangent(np.pi / 2 - eta))
    assert abs(jump) == pytest.approx(alpha, abs=1e-4)


def test_sc_profile_errors():
    with pytest.raises(bl.BlowupError):
        bl.SCProfile(0.0)
    with pytest.raises(bl.BlowupError):
        bl.SCProfile(4.0)
    with pytest.raises(bl.BlowupError, match="singularity"):
        bl.SCProfile(1.0).derivative(1j)
