"""
Closed-form oracle suite run by `dirac selftest`.
"""
import cmath
import math
import time

import numpy as np

from .basis import bessel_ratio, integer_lattice, basis_grid
from .bcond import BcKind, classify, preset, unperturbed_spectrum
from .chardet import char_det, expansion_delta
from .error_handling import DiracError, print_debug
from .evolve import fundamental_matrix, oracle_const_E, det2
from .potential import POTENTIAL_PRESETS, ZERO_POTENTIAL, build_mesh
from .resolvent import GridFunction, green_kernel, green_kernel_super
from .settings import GLOBAL_DEBUG
from .spectrum import compute_spectrum


def _report(name: str, expected, computed, ok: bool) -> bool:
    print("####################################################################################")
    print()
    print(f"Expected {name}: {expected}")
    print(f"Computed {name}: {computed}")
    print("passed" if ok else "FAILED")
    print()
    return ok


def _check_classify() -> bool:
    result = classify(preset("periodic"))
    return _report("kind of periodic boundary conditions", "RegularNotStrong, discriminant 0",
                   f"{result.kind.value}, discriminant {result.discriminant}",
                   result.kind is BcKind.REGULAR_NOT_STRONG and abs(result.discriminant) < 1e-12)


def _check_lattice() -> bool:
    model = unperturbed_spectrum(preset("separated"))
    computed = [model.lambda0(n) for n in range(-3, 4)]
    return _report("unperturbed separated lattice for n = -3..3", list(range(-3, 4)),
                   [f"{z.real:.12g}" for z in computed],
                   all(abs(z - n) < 1e-12 for z, n in zip(computed, range(-3, 4))))


def _check_constant_exponential() -> bool:
    P = POTENTIAL_PRESETS["offdiag-one"]
    lam, x = 0.3 + 0.2j, 1.2
    computed = fundamental_matrix(P, build_mesh(P), lam, x).E
    expected = oracle_const_E(1, 1, lam, x)
    error = float(np.max(np.abs(computed - expected)))
    return _report("E(1.2, 0.3+0.2i) for p2 = p3 = 1 against cos/sin closed form", "error < 1e-12",
                   f"error {error:.3e}", error < 1e-12)


def _check_liouville() -> bool:
    P = POTENTIAL_PRESETS["inverse-sqrt-both"]
    mesh = build_mesh(P)
    drift = max(abs(det2(fundamental_matrix(P, mesh, lam, x).E) - 1)
                for lam in (0.5, 3 - 1j, -2 + 1j) for x in (0.4, 2.0, math.pi))
    return _report("det E for p2 = p3 = x^(-1/2)", "1 within 1e-10", f"max drift {drift:.3e}", drift < 1e-10)


def _check_delta_constant() -> bool:
    P = POTENTIAL_PRESETS["offdiag-one"]
    U = preset("separated")
    computed = char_det(U, P, 0.0, with_derivative=False).delta
    expected = -2j * math.sinh(math.pi)
    E = fundamental_matrix(P, build_mesh(P), 0.0, math.pi).E
    expansion = expansion_delta(U, E)
    return _report("Delta(0) for p2 = p3 = 1, separated", f"{expected:.12g}", f"{computed:.12g} (expansion {expansion:.12g})",
                   abs(computed - expected) < 1e-10 and abs(expansion - expected) < 1e-10)


def _check_spectra() -> bool:
    zero = compute_spectrum(preset("separated"), ZERO_POTENTIAL, -5, 5)
    ok = _report("eigenvalues for P = 0, separated, n = -5..5", list(range(-5, 6)),
                 [f"{r.lam.real:.12g}" for r in zero], all(abs(r.lam - r.n) < 1e-9 for r in zero))
    expected = {-3: -math.sqrt(10), -2: -math.sqrt(5), -1: -1.0, 0: -math.sqrt(2), 1: math.sqrt(2),
                2: math.sqrt(5), 3: math.sqrt(10)}
    const = compute_spectrum(preset("separated"), POTENTIAL_PRESETS["offdiag-one"], -3, 3)
    ok &= _report("eigenvalues for p2 = p3 = 1, separated, n = -3..3", [f"{v:.12g}" for v in expected.values()],
                  [f"{r.lam.real:.12g}" for r in const],
                  all(abs(r.lam - expected[r.n]) < 1e-8 for r in const))
    periodic = compute_spectrum(preset("periodic"), ZERO_POTENTIAL, 0, 1)
    ok &= _report("eigenvalues for P = 0, periodic, n = 0..1", "0 and 0 with multiplicity 2",
                  [(f"{r.lam:.3g}", r.multiplicity) for r in periodic],
                  all(abs(r.lam) < 1e-7 and r.multiplicity == 2 for r in periodic))
    return ok


def _check_green() -> bool:
    U = preset("separated")
    computed = green_kernel(U, ZERO_POTENTIAL, 0.5, math.pi / 4, math.pi / 2)
    expected = -cmath.exp(-3j * math.pi / 8) / 2
    ok = _report("g11(pi/4, pi/2, 1/2) for P = 0, separated", f"{expected:.12g}", f"{computed[0, 0]:.12g}",
                 abs(computed[0, 0] - expected) < 1e-12)
    P = POTENTIAL_PRESETS["smooth"]
    difference = max(float(np.max(np.abs(green_kernel(U, P, lam, t, x) - green_kernel_super(U, P, lam, t, x))))
                     for lam in (1j, 0.5 + 2j) for t, x in ((0.3, 2.0), (2.5, 1.0)))
    ok &= _report("difference of the two Green formulas", "below 1e-8", f"{difference:.3e}", difference < 1e-8)
    return ok


def _check_bessel() -> bool:
    N = 400
    grid = basis_grid(N)
    ones = GridFunction(grid, np.vstack([np.ones(grid.size), np.zeros(grid.size)]).astype(complex))
    ratio = bessel_ratio(ones, integer_lattice(N), N)
    return _report(f"Bessel ratio of f = 1 on the integer lattice, N = {N}", f"{2 * math.pi:.6f} within 1%",
                   f"{ratio:.6f}", abs(ratio - 2 * math.pi) < 0.01 * 2 * math.pi)


CHECKS = (_check_classify, _check_lattice, _check_constant_exponential, _check_liouville, _check_delta_constant,
          _check_spectra, _check_green, _check_bessel)


def run_selftest(debug: bool = GLOBAL_DEBUG) -> int:
    """
    Runs all oracle checks and prints expected and computed values.
    :param debug: True if debug information should be printed
    :type debug: bool
    :return: Number of failed checks
    :rtype: int
    """
    if debug:
        start_time = time.perf_counter()
    failed = 0
    for check in CHECKS:
        try:
            ok = check()
        except DiracError as e:
            ok = _report(check.__name__[len("_check_"):], "no error", f"{type(e).__name__}: {e}", False)
        failed += 0 if ok else 1
    print(f"{len(CHECKS) - failed} of {len(CHECKS)} checks passed")
    if debug:
        print_debug(f"Selftest finished in {(time.perf_counter() - start_time):.6f} seconds")
    return failed
