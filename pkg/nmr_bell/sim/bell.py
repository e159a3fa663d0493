"""
Bell functionals in the three-party, two-setting, two-outcome scenario.

A functional is a table of integer coefficients over correlators
⟨A_a B_b C_c⟩ where absent parties contribute identity factors. The shipped
T26 functional is maximally violated by |S⟩ with σz/σx settings on every
party: 1 + 4√3 against a local bound of 5.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace
import itertools
import logging
import math
import re

import numpy as np

from ..const import DEFAULT_SWEEP_POINTS, DIM, HERM_TOL
from .circuits import PseudopureSpec, pseudopure_density
from .constants import Party
from .exceptions import DimensionError, ValidationError
from .models import BellFunctional, BellTerm
from .qstate import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Z,
    DensityMatrix,
    HermitianOperator,
    RealArray,
    expectation,
    kron_all,
)

_LOGGER = logging.getLogger(__name__)

_SLOTS = tuple(f"{party.lower()}{which}" for party in "ABC" for which in (0, 1))
_FACTOR = re.compile(r"^([ABC])_?([01])$")


def _term(coeff: int, a: int | None = None, b: int | None = None, c: int | None = None) -> BellTerm:
    return BellTerm(a=a, b=b, c=c, coeff=coeff)


def t26() -> BellFunctional:
    """
    Return the T26 functional with local bound 5.

    The ⟨A0 B1 C1⟩ coefficient is +2; with +1 the enumerated local bound is
    6 and |S⟩ is no longer the optimal state (see ``t26_as_printed``).
    """
    return BellFunctional(
        name="T26",
        terms=(
            _term(1, a=0),
            _term(1, b=0),
            _term(1, a=0, b=0),
            _term(2, a=1, b=1),
            _term(1, c=0),
            _term(1, a=0, c=0),
            _term(1, b=0, c=0),
            _term(-1, a=0, b=0, c=0),
            _term(-2, a=1, b=1, c=0),
            _term(2, a=1, c=1),
            _term(-2, a=1, b=0, c=1),
            _term(-2, b=1, c=1),
            _term(2, a=0, b=1, c=1),
        ),
        classical_bound=5.0,
    )


def t26_as_printed() -> BellFunctional:
    """Return T26 with +1 on ⟨A0 B1 C1⟩; its enumerated local bound is 6."""
    terms = tuple(
        t.model_copy(update={"coeff": 1}) if t.key == (0, 1, 1) else t
        for t in t26().terms
    )
    return BellFunctional(name="T26-as-printed", terms=terms, classical_bound=6.0)


def chsh() -> BellFunctional:
    """Return CHSH on parties A and B, local bound 2."""
    return BellFunctional(
        name="CHSH",
        terms=(
            _term(1, a=0, b=0),
            _term(1, a=0, b=1),
            _term(1, a=1, b=0),
            _term(-1, a=1, b=1),
        ),
        classical_bound=2.0,
    )


def observable(theta: float) -> HermitianOperator:
    """Return cos θ·σz + sin θ·σx, dichotomous for every θ."""
    return HermitianOperator(
        math.cos(theta) * SIGMA_Z.entries + math.sin(theta) * SIGMA_X.entries,
        f"O({theta:.4f})",
    )


def _check_dichotomous(name: str, op: HermitianOperator) -> None:
    if op.dim != 2:
        raise DimensionError(f"observable {name} must be single-qubit")
    if np.max(np.abs(op.entries @ op.entries - np.eye(2))) > HERM_TOL:
        raise ValidationError(f"observable {name} is not dichotomous (O² ≠ I)")


@dataclass(frozen=True, slots=True)
class MeasurementSettings:
    """Two ±1-valued single-qubit observables per party."""

    a0: HermitianOperator
    a1: HermitianOperator
    b0: HermitianOperator
    b1: HermitianOperator
    c0: HermitianOperator
    c1: HermitianOperator

    def __post_init__(self) -> None:
        """Check every observable squares to the identity."""
        for slot in _SLOTS:
            _check_dichotomous(slot, getattr(self, slot))

    @classmethod
    def maximal(cls) -> MeasurementSettings:
        """Return σz for setting 0 and σx for setting 1 on every party."""
        return cls(SIGMA_Z, SIGMA_X, SIGMA_Z, SIGMA_X, SIGMA_Z, SIGMA_X)

    def get(self, party: Party | str, which: int) -> HermitianOperator:
        """Return the observable of ``party`` for setting ``which``."""
        return getattr(self, f"{Party(party).lower()}{which}")

    def with_observable(
        self, party: Party | str, which: int, op: HermitianOperator
    ) -> MeasurementSettings:
        """Return a copy with one observable replaced."""
        return replace(self, **{f"{Party(party).lower()}{which}": op})


def correlator_operator(term: BellTerm, settings: MeasurementSettings) -> HermitianOperator:
    """Return O_a ⊗ O_b ⊗ O_c for a term, identities for absent parties."""
    factors = [
        IDENTITY_2.entries if idx is None else settings.get(party, idx).entries
        for party, idx in zip(Party, term.key, strict=True)
    ]
    return HermitianOperator(kron_all(factors), term.label)


def bell_operator(functional: BellFunctional, settings: MeasurementSettings) -> HermitianOperator:
    """Return Σ coeff·O_a⊗O_b⊗O_c; its top eigenvalue is the quantum maximum."""
    total = np.zeros((DIM, DIM), dtype=np.complex128)
    for term in functional.terms:
        total += term.coeff * correlator_operator(term, settings).entries
    return HermitianOperator(total, functional.name)


def evaluate(
    functional: BellFunctional, rho: DensityMatrix, settings: MeasurementSettings
) -> float:
    """Return Σ coeff·Tr(ρ·O_a⊗O_b⊗O_c)."""
    return expectation(rho, bell_operator(functional, settings))


def correlators(
    functional: BellFunctional, rho: DensityMatrix, settings: MeasurementSettings
) -> dict[str, float]:
    """Return each correlator of the functional keyed by its label."""
    return {
        term.label: expectation(rho, correlator_operator(term, settings))
        for term in functional.terms
    }


@dataclass(frozen=True, slots=True)
class ClassicalBound:
    """Maximum over deterministic strategies and every strategy reaching it."""

    bound: float
    strategies: tuple[tuple[int, ...], ...]

    @property
    def best_strategy(self) -> tuple[int, ...]:
        """Lowest-index maximizing assignment (a0, a1, b0, b1, c0, c1)."""
        return self.strategies[0]


def strategy_value(functional: BellFunctional, strategy: Sequence[int]) -> float:
    """Return the functional on one ±1 assignment (a0, a1, b0, b1, c0, c1)."""
    total = 0.0
    for term in functional.terms:
        product = 1
        for offset, idx in zip((0, 2, 4), term.key, strict=True):
            if idx is not None:
                product *= strategy[offset + idx]
        total += term.coeff * product
    return total


def classical_bound_bruteforce(functional: BellFunctional) -> ClassicalBound:
    """
    Enumerate all 64 deterministic local strategies.

    Strategies are indexed in ``itertools.product((1, -1), repeat=6)`` order;
    the returned tuple keeps that order.
    """
    values = [
        (strategy, strategy_value(functional, strategy))
        for strategy in itertools.product((1, -1), repeat=6)
    ]
    bound = max(v for _, v in values)
    winners = tuple(s for s, v in values if v == bound)
    _LOGGER.debug(
        "%s local bound %.1f reached by %d strategies",
        functional.name,
        bound,
        len(winners),
    )
    return ClassicalBound(bound=bound, strategies=winners)


def default_grid(points: int = DEFAULT_SWEEP_POINTS) -> RealArray:
    """Return ``points`` equally spaced angles on [0, π]."""
    return np.linspace(0.0, math.pi, points)


@dataclass(frozen=True, slots=True)
class SweepCurve:
    """Functional value as one observable rotates in the x–z plane."""

    party: Party
    which: int
    thetas: RealArray
    values: RealArray

    @property
    def argmax_theta(self) -> float:
        """Angle of the first maximum on the grid."""
        return float(self.thetas[int(np.argmax(self.values))])

    @property
    def max_value(self) -> float:
        """Maximum value on the grid."""
        return float(np.max(self.values))

    def rows(self) -> list[tuple[float, float]]:
        """Return (theta, value) pairs."""
        return list(zip(self.thetas.tolist(), self.values.tolist(), strict=True))


def incompatibility_sweep(
    rho: DensityMatrix,
    base: MeasurementSettings,
    party: Party | str,
    which: int,
    thetas: Iterable[float] | None = None,
    functional: BellFunctional | None = None,
) -> SweepCurve:
    """
    Replace one observable by cos θ·σz + sin θ·σx and evaluate on a grid.

    The other five observables stay at ``base``.
    """
    functional = functional or t26()
    grid = default_grid() if thetas is None else np.asarray(list(thetas), dtype=np.float64)
    values = np.array(
        [
            evaluate(functional, rho, base.with_observable(party, which, observable(t)))
            for t in grid
        ]
    )
    return SweepCurve(party=Party(party), which=which, thetas=grid, values=values)


@dataclass(frozen=True, slots=True)
class ScanEntry:
    """Summary of the sweep of one observable slot."""

    party: Party
    which: int
    base_value: float
    compatible_value: float
    argmax_theta: float
    max_value: float


def incompatibility_scan(
    rho: DensityMatrix,
    base: MeasurementSettings,
    thetas: Iterable[float] | None = None,
    functional: BellFunctional | None = None,
) -> list[ScanEntry]:
    """
    Sweep each of the six observables in turn.

    ``compatible_value`` is the functional with the slot set equal to the
    same party's other observable, which makes that party's pair commute.
    """
    functional = functional or t26()
    grid = default_grid() if thetas is None else list(thetas)
    base_value = evaluate(functional, rho, base)
    entries: list[ScanEntry] = []
    for party in Party:
        for which in (0, 1):
            curve = incompatibility_sweep(rho, base, party, which, grid, functional)
            partner = base.get(party, 1 - which)
            compatible = evaluate(
                functional, rho, base.with_observable(party, which, partner)
            )
            entries.append(
                ScanEntry(
                    party=party,
                    which=which,
                    base_value=base_value,
                    compatible_value=compatible,
                    argmax_theta=curve.argmax_theta,
                    max_value=curve.max_value,
                )
            )
    return entries


@dataclass(frozen=True, slots=True)
class PseudopureEvaluation:
    """Functional on the literal pseudopure matrix and on its pure core."""

    raw: float
    renormalized: float


def pps_scaled_evaluate(
    functional: BellFunctional,
    spec: PseudopureSpec,
    settings: MeasurementSettings,
) -> PseudopureEvaluation:
    """
    Evaluate on a pseudopure state both ways.

    ``raw`` scales with ε because every term has a traceless factor;
    ``renormalized`` is the pure-core value NMR experiments report.
    """
    raw = evaluate(functional, pseudopure_density(spec), settings)
    core = evaluate(functional, spec.core.density(), settings)
    return PseudopureEvaluation(raw=raw, renormalized=core)


def parse_functional(text: str, name: str = "custom") -> BellFunctional:
    """
    Parse the text form of a Bell functional.

    Each line is ``<coeff> <A_i>[*<B_j>][*<C_k>]``, ``bound <value>`` or
    ``name <text>``; blank lines and ``#`` comments are ignored.

    Raises:
        ValidationError: On malformed lines, party labels out of order or a
            missing bound.

    """
    terms: list[BellTerm] = []
    bound: float | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "bound":
            try:
                bound = float(rest)
            except ValueError as err:
                raise ValidationError(f"line {lineno}: bad bound {rest!r}") from err
            continue
        if head == "name":
            name = rest
            continue
        try:
            coeff = int(head)
        except ValueError as err:
            raise ValidationError(f"line {lineno}: bad coefficient {head!r}") from err
        selectors: dict[str, int] = {}
        for factor in rest.replace(" ", "").split("*"):
            match = _FACTOR.match(factor)
            if match is None:
                raise ValidationError(f"line {lineno}: bad party label {factor!r}")
            party, idx = match.group(1), int(match.group(2))
            if selectors and party.lower() <= max(selectors):
                raise ValidationError(f"line {lineno}: parties out of order in {rest!r}")
            selectors[party.lower()] = idx
        try:
            terms.append(BellTerm(coeff=coeff, **selectors))
        except ValueError as err:
            raise ValidationError(f"line {lineno}: {err}") from err
    if bound is None:
        raise ValidationError("functional text has no bound line")
    try:
        return BellFunctional(name=name, terms=tuple(terms), classical_bound=bound)
    except ValueError as err:
        raise ValidationError(str(err)) from err


def format_functional(functional: BellFunctional) -> str:
    """Return the text form read by ``parse_functional``."""
    lines = [f"name {functional.name}"]
    lines += [f"{t.coeff:+d} {t.label}" for t in functional.terms]
    lines.append(f"bound {functional.classical_bound:g}")
    return "\n".join(lines) + "\n"
