"""Material constants of an isotropic thermoelastic medium."""
import math
import warnings
from dataclasses import dataclass

from .errors import ConstraintViolation

FIELDS = ("rho", "lambda", "mu", "gamma", "eta", "kappa")


@dataclass(frozen=True)
class Material:
    """Density, Lamé constants, coupling constants and thermal diffusivity.

    ``lam`` is the first Lamé constant (``lambda`` is reserved in Python; the
    JSON form uses the key ``"lambda"``).  ``gamma`` multiplies the temperature
    gradient in the momentum equation and ``s * eta`` multiplies the dilatation
    rate in the energy equation.
    """

    rho: float
    lam: float
    mu: float
    gamma: float
    eta: float
    kappa: float

    def __post_init__(self):
        for name in ("rho", "lam", "mu", "gamma", "eta", "kappa"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ConstraintViolation(f"{name} must be a finite real, got {v!r}")
            object.__setattr__(self, name, float(v))
        rules = [
            ("rho > 0", self.rho > 0),
            ("mu > 0", self.mu > 0),
            ("3*lambda + 2*mu > 0", 3 * self.lam + 2 * self.mu > 0),
            ("gamma/eta > 0", self._coupling_ok()),
            ("kappa > 0", self.kappa > 0),
        ]
        for label, ok in rules:
            if not ok:
                raise ConstraintViolation(label)

    def _coupling_ok(self):
        # the decoupled medium gamma = eta = 0 is admitted as the limit case
        if self.gamma == 0 and self.eta == 0:
            return True
        if self.eta == 0:
            return False
        return self.gamma / self.eta > 0

    @property
    def decoupled(self):
        return self.gamma == 0 and self.eta == 0

    def to_dict(self):
        return {"rho": self.rho, "lambda": self.lam, "mu": self.mu,
                "gamma": self.gamma, "eta": self.eta, "kappa": self.kappa}

    def replace(self, **kw):
        d = dict(rho=self.rho, lam=self.lam, mu=self.mu, gamma=self.gamma,
                 eta=self.eta, kappa=self.kappa)
        d.update(kw)
        return Material(**d)


@dataclass(frozen=True)
class DerivedConstants:
    epsilon: float
    c_s: float
    c_p: float
    strong_coupling: bool


def validate_material(raw):
    """Build a Material from a mapping with the six keys of ``FIELDS``."""
    missing = [k for k in FIELDS if k not in raw]
    if missing:
        raise ConstraintViolation(f"missing material constants: {', '.join(missing)}")
    return Material(rho=raw["rho"], lam=raw["lambda"], mu=raw["mu"],
                    gamma=raw["gamma"], eta=raw["eta"], kappa=raw["kappa"])


def derive_constants(m):
    """Coupling constant epsilon and the two phase velocities.

    epsilon >= 1 is accepted; ``strong_coupling`` flags it and a warning is
    issued, since most media have epsilon well below one.
    """
    eps = m.gamma * m.eta * m.kappa / (m.lam + 2 * m.mu)
    strong = eps >= 1
    if strong:
        warnings.warn(f"coupling constant epsilon = {eps:g} >= 1", stacklevel=2)
    return DerivedConstants(epsilon=eps, c_s=math.sqrt(m.mu),
                            c_p=math.sqrt(m.lam + 2 * m.mu), strong_coupling=strong)
