"""Exception hierarchy shared across the library."""


class HitchsovError(Exception):
    """Base class for all library errors."""


class DegreeError(HitchsovError):
    """Defining polynomial has unsupported degree."""


class DuplicateBranchPoint(HitchsovError):
    """Two roots of the defining polynomial coincide within tolerance."""


class BranchProximity(HitchsovError):
    """A path entered the exclusion radius of a branch point."""


class ContinuationAmbiguity(HitchsovError):
    """The two sheet candidates are too close to continue y reliably."""


class CycleDegenerate(HitchsovError):
    """Could not build a valid homology contour for the branch configuration."""


class RankError(HitchsovError):
    """Unsupported rank for the requested Lie family."""


class ConditioningWarning(UserWarning):
    """Root clusters too close for certified polishing."""


class SingularConfiguration(HitchsovError):
    """Design matrix of the separating system is singular."""


class SingularJacobian(HitchsovError):
    """Jacobian of the separating system w.r.t. H is singular."""


class NewtonDivergence(HitchsovError):
    """Multi-start Newton failed to reach the residual target."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class BranchLocus(HitchsovError):
    """Evaluation requested on the branch locus of the lambda-cover."""


class IllConditioned(HitchsovError):
    """Matrix condition estimate exceeds the configured cap."""


class StepRejected(HitchsovError):
    """Integration step produced an inconsistent state."""

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class BranchCollision(HitchsovError):
    """A separating point collided with a branch point during a flow."""


class TruncationOverflow(HitchsovError):
    """Theta lattice truncation radius exceeds the configured cap."""


class ThetaDivisor(HitchsovError):
    """Theta value below tolerance where a division is required."""


class ResidueUnstable(HitchsovError):
    """Contour residue did not stabilise under sample doubling."""


class DegenerateLine(HitchsovError):
    """Two proportional points do not span a line."""


class PoleCollision(HitchsovError):
    """Spectral parameters collide with a pole of the M-matrix."""


class ChartSingularity(HitchsovError):
    """No affine chart of P^3 is usable for the current point."""


class IndeterminateDimension(HitchsovError):
    """Cohomology dimension not determined by degree arithmetic alone."""


class TruncationInsufficient(HitchsovError):
    """Power-series truncation too short to decide the requested valuations."""


class NotIntegral(HitchsovError):
    """Newton polygon shows a unit factor (valuation-zero root)."""


class ValidationError(HitchsovError):
    """Malformed or inconsistent system description."""

    def __init__(self, message, field_path=None):
        super().__init__(message)
        self.field_path = field_path

    def __str__(self):
        base = super().__str__()
        if self.field_path:
            return f"{base} (at {self.field_path})"
        return base
