"""Robit and probit data augmentation / sandwich samplers with trace-class checks."""

__version__ = "0.1.0"

from .chains import (  # noqa: E402
    ChainConfig,
    ChainError,
    ChainState,
    NonzeroPriorMeanWarning,
    SampleMatrix,
    probit_da_step,
    probit_sandwich_step,
    robit_da_step,
    robit_sandwich_step,
    run_chain,
)
from .diagnostics import (  # noqa: E402
    AcfResult,
    ConstantSeriesError,
    RunningMeanSeries,
    autocorrelation,
    log_likelihood,
    log_posterior,
    mcse_batch_means,
    running_mean,
)
from .io import RunManifest, ingest_csv  # noqa: E402
from .linalg import (  # noqa: E402
    Dataset,
    DimensionError,
    Prior,
    SingularPriorError,
    Whitened,
    build_gprior,
    omega_closed_form,
    omega_direct,
    posterior_precision,
    sigma_lambda,
    whiten,
)
from .models import ModelKind, UnverifiedModelWarning  # noqa: E402
from .special import (  # noqa: E402
    DomainError,
    NotPositiveDefiniteError,
    RngStream,
    TDist,
    TruncationSide,
    TruncationUnderflowError,
    incomplete_beta_ratio,
    sample_gamma,
    sample_mvn_from_precision,
    sample_truncated_normal,
    sample_truncated_t,
    t_cdf,
    t_quantile,
)
from .verify import (  # noqa: E402
    BoundCheckReport,
    TraceEstimate,
    check_mills_bound,
    check_omega_spectrum,
    check_step4_bound,
    kappa,
    kappa_m,
    kernel_diag_mc,
    trace_mc,
)
