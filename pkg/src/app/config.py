from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    app_name: str = "phsums"
    environment: str = "dev"
    log_level: str = "INFO"

    # Runs
    output_dir: str = "runs"
    jobs: int = 1

    # Per-kind size guards
    cech_oracle_max_points: int = 32
    alpha2d_max_points: int = 20000
    rips_max_points: int = 1000
    mst_max_points: int = 100000

    # Rips truncation: factor * (log n / n)^(1/m) * diam
    rips_scale_factor: float = 3.0

    # Lower-bound window (0 < b0 < d0 < 1/6)
    window_birth: float = 0.05
    window_death: float = 0.15
    window_n0: int = 64

    # Verdicts
    slope_tolerance: float = 0.05
    band_factor: float = 3.0
    quorum: float = 0.9
    quorum_band: float = 0.25
    min_trials_per_n: int = 5
    variance_min_trials: int = 20

    model_config = SettingsConfigDict(env_file=".env", env_prefix="PHSUMS_", extra="ignore")


settings = Settings()
