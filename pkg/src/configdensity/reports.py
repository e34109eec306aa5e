from dataclasses import dataclass, field


@dataclass
class BoundReport:
    """Outcome of one identity or inequality check.

    ``margin`` is positive when the check holds with room to spare: ``rhs - lhs``
    for inequalities ``lhs <= rhs`` and ``tolerance - |lhs - rhs|`` for
    identities.
    """

    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    relation: str = "<="
    details: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: lhs={self.lhs:.10g} {self.relation} rhs={self.rhs:.10g} (margin {self.margin:.3g})"

    @classmethod
    def inequality(cls, name, lhs, rhs, slack=0.0, **details):
        lhs, rhs = float(lhs), float(rhs)
        margin = rhs - lhs
        return cls(name, lhs, rhs, margin, bool(margin >= -slack), "<=", details)

    @classmethod
    def identity(cls, name, lhs, rhs, tol, **details):
        lhs, rhs = float(lhs), float(rhs)
        margin = tol - abs(lhs - rhs)
        return cls(name, lhs, rhs, margin, bool(margin >= 0), "==", details)
