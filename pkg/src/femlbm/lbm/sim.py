"""Time-marching driver for a single LBM subdomain."""

from dataclasses import dataclass, field as dc_field

from .core import collide, stream


@dataclass
class LbmSimulation:
    """Owns the evolving field of one lattice domain.

    One `step()` is collide -> stream -> boundary closures, with the
    boundary data evaluated at the new time level. The field attribute is
    replaced (never mutated), so saving a reference to it is a checkpoint.
    """

    field: object
    boundaries: object
    D: float
    half_vv: bool = True
    time: float = 0.0
    extra_patches: list = dc_field(default_factory=list)

    def step(self):
        fld = stream(collide(self.field, self.D, self.half_vv))
        t_new = self.time + fld.dt
        self.boundaries.apply(fld.f, t_new, fld.dt, fld.grid.h)
        self.field = fld
        self.time = t_new
        return fld

    def run(self, n_steps, callback=None):
        for k in range(n_steps):
            self.step()
            if callback is not None:
                callback(k, self)
        return self.field

    def state(self):
        return (self.field, self.time)

    def restore(self, state):
        self.field, self.time = state
