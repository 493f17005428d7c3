"""Link models: robit (Student-t CDF with nu degrees of freedom) and probit."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .special import DomainError, t_logcdf


class UnverifiedModelWarning(UserWarning):
    """Robit model with nu <= 2, outside the range covered by the trace-class result."""


@dataclass(frozen=True)
class ModelKind:
    name: str
    nu: float | None = None
    allow_low_nu: bool = False

    def __post_init__(self):
        if self.name == "probit":
            if self.nu is not None:
                raise ValueError("probit takes no degrees of freedom")
        elif self.name == "robit":
            if self.nu is None or not np.isfinite(self.nu) or self.nu <= 0:
                raise DomainError(f"robit needs nu > 0, got {self.nu!r}")
            object.__setattr__(self, "nu", float(self.nu))
            if self.nu <= 2:
                if not self.allow_low_nu:
                    raise DomainError(
                        f"robit chains require nu > 2 (got {self.nu}); pass allow_low_nu=True to override"
                    )
                warnings.warn(
                    f"nu={self.nu} <= 2: geometric ergodicity of the chain is not established here",
                    UnverifiedModelWarning,
                    stacklevel=3,
                )
        else:
            raise ValueError(f"unknown model {self.name!r}")

    @classmethod
    def robit(cls, nu: float, allow_low_nu: bool = False) -> "ModelKind":
        return cls("robit", nu, allow_low_nu)

    @classmethod
    def probit(cls) -> "ModelKind":
        return cls("probit")

    @property
    def is_robit(self) -> bool:
        return self.name == "robit"

    @property
    def label(self) -> str:
        return f"robit-{self.nu:g}" if self.is_robit else "probit"

    def log_cdf(self, eta):
        """log F(eta) for the model's link CDF, finite far into the lower tail."""
        if self.is_robit:
            return t_logcdf(eta, self.nu)
        return sc.log_ndtr(eta)

    def cdf(self, eta):
        if self.is_robit:
            return sc.stdtr(self.nu, eta)
        return sc.ndtr(eta)
