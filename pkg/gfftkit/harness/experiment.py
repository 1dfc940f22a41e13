"""Runtime objects built from a validated run configuration."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property

from ..config.models import RunConfig
from ..core.cmspace import (
    CMElement,
    KernelOperator,
    OrthonormalBasis,
    beta,
    poly_element,
    standard_basis,
)
from ..core.exceptions import ConfigurationError
from ..core.fresnel import (
    AtomicMeasure,
    LambdaPair,
    PhaseFunctional,
    build_fresnel,
    build_from_theta,
)
from ..core.gbm import PathSample, RngStream
from ..core.timefns import SpaceConfig, make_space
from .verify import (
    VerifyReport,
    verify_cameron_storvick_feynman,
    verify_cameron_storvick_mu,
    verify_change_of_scale,
    verify_gfft_translation,
    verify_lemma_limit,
    verify_limit_gfft,
    verify_kernel_form,
    verify_translation,
    verify_variation_limits,
)

# default limit-theorem acceptance at the last n of n_list
LIMIT_FINAL_TOL = 1e-3


@dataclass(eq=False)
class Experiment:
    config: RunConfig
    cfg: SpaceConfig = field(init=False)

    def __post_init__(self) -> None:
        s = self.config.space
        self.cfg = make_space(
            s.a_family, s.a_params, s.b_family, s.b_params, s.T, s.grid_n
        )

    @cached_property
    def elements(self) -> dict[str, CMElement]:
        return {
            name: poly_element(coeffs, self.cfg)
            for name, coeffs in self.config.elements.items()
        }

    def element(self, name: str | None, default: CMElement | None = None) -> CMElement:
        if name is None:
            if default is None:
                raise ConfigurationError("a required element name is missing")
            return default
        return self.elements[name]

    @cached_property
    def A1(self) -> KernelOperator:
        return KernelOperator.from_poly(self.config.operators.phi1_poly, self.cfg)

    @cached_property
    def A2(self) -> KernelOperator:
        return KernelOperator.from_poly(self.config.operators.phi2_poly, self.cfg)

    @cached_property
    def A(self) -> KernelOperator:
        coeffs = self.config.operators.phi_poly
        if coeffs is None:
            raise ConfigurationError(
                "operators.phi_poly is required for this command",
                details={"fields": ["operators.phi_poly"]},
            )
        return KernelOperator.from_poly(coeffs, self.cfg)

    @cached_property
    def measure(self) -> AtomicMeasure:
        atoms = [
            (atom.coef, poly_element(atom.z_poly, self.cfg))
            for atom in self.config.measure.atoms
        ]
        return AtomicMeasure.from_atoms(atoms, self.cfg)

    @cached_property
    def functional(self) -> PhaseFunctional:
        theta = self.config.theta
        if theta is not None:
            return build_from_theta(
                [(p.weight, p.v) for p in theta.points],
                [self.elements[name] for name in theta.directions],
                self.A1,
                self.A2,
            )
        return build_fresnel(self.measure, self.A1, self.A2)

    @cached_property
    def basis(self) -> OrthonormalBasis:
        return standard_basis(self.config.run.basis_size, self.cfg)

    @property
    def q(self) -> tuple[float, float]:
        return (self.config.run.q1, self.config.run.q2)

    @property
    def boundary(self) -> LambdaPair:
        return LambdaPair.boundary(*self.q)

    @property
    def interior(self) -> LambdaPair:
        run = self.config.run
        return LambdaPair.interior(complex(run.lambda_re, run.lambda_im))

    def rng(self, stream_id: int = 0) -> RngStream:
        return RngStream(self.config.run.seed, stream_id)

    def path(self, name: str | None) -> PathSample:
        """Deterministic path from a named element, or the zero path."""
        if name is None:
            return PathSample.zero(self.cfg)
        return PathSample.from_element(self.elements[name])

    @property
    def directions(self) -> tuple[CMElement, CMElement]:
        run = self.config.run
        zero = CMElement.zero(self.cfg)
        return self.element(run.g1, beta(self.cfg.T, self.cfg)), self.element(
            run.g2, zero
        )

    # -- verifiers ------------------------------------------------------------

    def verify_lemma(self) -> list[VerifyReport]:
        run = self.config.run
        w = self.element(run.w, beta(self.cfg.T, self.cfg))
        reports: list[VerifyReport] = []
        for n in run.n_list:
            reports.extend(
                verify_lemma_limit(
                    complex(run.lambda_re, run.lambda_im),
                    w,
                    self.basis,
                    n,
                    mc_n=run.samples,
                    rng=self.rng(0),
                )
            )
        return reports

    def verify_limit(self) -> list[VerifyReport]:
        run = self.config.run
        return verify_limit_gfft(
            self.functional,
            self.q,
            self.path(run.y1),
            self.path(run.y2),
            self.basis,
            run.n_list,
            q0=run.q0,
            final_tolerance=LIMIT_FINAL_TOL,
            mc_n=run.samples,
            rng=self.rng(2),
        )

    def verify_scale(self) -> list[VerifyReport]:
        run = self.config.run
        return verify_change_of_scale(
            self.functional,
            run.rho1,
            run.rho2,
            self.basis,
            run.n_list,
            mc_n=run.samples,
            rng=self.rng(4),
        )

    def verify_variation(self) -> list[VerifyReport]:
        run = self.config.run
        g1, g2 = self.directions
        return verify_variation_limits(
            self.functional,
            g1,
            g2,
            self.q,
            self.path(run.y1),
            self.path(run.y2),
            self.basis,
            run.n_list,
            (run.rho1, run.rho2),
            q0=run.q0,
            final_tolerance=LIMIT_FINAL_TOL,
            mc_n=run.samples,
            rng=self.rng(12),
        )

    def verify_translation(self) -> list[VerifyReport]:
        run = self.config.run
        x0 = self.element(run.x0, beta(self.cfg.T, self.cfg))
        reports = verify_translation(
            self.functional, x0, mc_n=run.samples, rng=self.rng(6)
        )
        g1, g2 = self.directions
        reports.append(
            verify_gfft_translation(
                self.functional,
                self.q,
                g1,
                g2,
                self.path(run.y1),
                self.path(run.y2),
                q0=run.q0,
            )
        )
        return reports

    def verify_cs_mu(self) -> list[VerifyReport]:
        run = self.config.run
        g1, g2 = self.directions
        return [
            verify_cameron_storvick_mu(
                self.functional, g1, g2, run.rho1, run.rho2,
                mc_n=run.samples, rng=self.rng(8),
            )
        ]

    def verify_cs_feynman(self) -> list[VerifyReport]:
        run = self.config.run
        g1, g2 = self.directions
        reports = [
            verify_cameron_storvick_feynman(
                self.functional, g1, g2, self.q, q0=run.q0
            )
        ]
        # the real-λ identity the Feynman version continues from
        reports.append(
            verify_cameron_storvick_mu(
                self.functional, g1, g2, 1.0, 1.0,
                mc_n=run.samples, rng=self.rng(10),
            )
        )
        return reports

    def verify_kernel_form(self) -> list[VerifyReport]:
        g = self.element(self.config.run.g, beta(self.cfg.T, self.cfg))
        return [verify_kernel_form(self.measure, self.A, g)]

    def verifiers(self) -> dict[str, Callable[[], list[VerifyReport]]]:
        verifiers = {
            "translation": self.verify_translation,
            "limit": self.verify_limit,
            "scale": self.verify_scale,
            "cs-mu": self.verify_cs_mu,
            "cs-feynman": self.verify_cs_feynman,
            "lemma": self.verify_lemma,
            "variation": self.verify_variation,
        }
        if self.config.operators.phi_poly is not None:
            verifiers["section9"] = self.verify_kernel_form
        return verifiers


VERIFIER_NAMES = (
    "translation",
    "limit",
    "scale",
    "cs-mu",
    "cs-feynman",
    "lemma",
    "variation",
    "section9",
)

# older name of the kernel-form check
VERIFIER_ALIASES = {"kernel-form": "section9"}
