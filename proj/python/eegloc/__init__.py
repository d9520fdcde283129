"""EEG electrode localisation on T1 + UTE MR volumes."""

from ._core import (
    EeglocError,
    Volume,
    default_template,
    detect_electrodes,
    detect_spheres,
    evaluate,
    fiducial_baseline,
    generate_phantom,
    icp_register,
    paired_t_test,
    read_nifti,
    run_cli,
    sphere_volume,
    student_t_cdf,
    umeyama,
    write_nifti,
)

__all__ = [
    "EeglocError",
    "Volume",
    "default_template",
    "detect_electrodes",
    "detect_spheres",
    "evaluate",
    "fiducial_baseline",
    "generate_phantom",
    "icp_register",
    "paired_t_test",
    "read_nifti",
    "run_cli",
    "sphere_volume",
    "student_t_cdf",
    "umeyama",
    "write_nifti",
]
