from pydantic import BaseModel, ConfigDict, Field, model_validator


class IntegratorConfig(BaseModel):
    """
    Fourth-order Runge-Kutta with step doubling.

    Each step is compared with two half steps; the half-step result is kept
    when their largest entry difference is below ``atol``. With
    ``fixed_step`` the step is ``initial_step`` (shortened to fit each
    interval) and no error control is done.
    """

    model_config = ConfigDict(frozen=True)

    initial_step: float = Field(default=0.5, gt=0)
    atol: float = Field(default=1e-10, gt=0)
    max_step: float = Field(default=2.0, gt=0)
    min_step: float = Field(default=1e-9, gt=0)
    max_trace_drift: float = Field(default=1e-8, gt=0)
    fixed_step: bool = False

    @model_validator(mode="after")
    def _ordered_steps(self):
        if not self.min_step <= self.initial_step <= self.max_step:
            raise ValueError(
                "Steps must satisfy min_step <= initial_step <= max_step, got "
                f"{self.min_step}, {self.initial_step}, {self.max_step}"
            )
        return self
