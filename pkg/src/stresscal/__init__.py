"""Physiological stress features and individual performance calibration.

Pipeline in one breath: load a four-channel recording (ECG, BVP, GSR,
EMG) with its session markers, detect beats / skin-conductance
responses / muscle bursts, reduce them to per-scenario and per-level
features, score the stimulus log, and locate the difficulty level where
the subject's accuracy collapses — the level before it is their
individual optimum.
"""

from .calibration import (CalibrationConfig, SubjectCalibration, TestCalibration,
                          calibrate_subject, detect_decrease_level, gsr_peaks_until,
                          hr_increment, optimal_level)
from .cardiac import (BeatDetectorConfig, BeatSeries, HrSeries, beats_to_hr,
                      cardiac_agreement, detect_bvp_peaks, detect_r_peaks, hr_stats)
from .core import (ChannelManifest, LevelInterval, ManifestEntry, Scenario,
                   SessionMarkers, TimeSeries, Window, default_markers,
                   load_channels, load_manifest, load_markers, load_series,
                   save_manifest, save_markers, slice_window, write_series)
from .eda import (BatemanKernel, EdaConfig, EdaDecomposition, ScrEvent, decompose,
                  detect_scr_events, reconstruct)
from .emg import BurstConfig, EmgBurst, burst_threshold, detect_bursts, emg_envelope
from .errors import ProcessingError, SolverError, StresscalError, ValidationError
from .features import (FeatureVector, ProcessedSession, SlopeFit, extract_features,
                       feature_table, gsr_cumulative_slope, hr_slope,
                       write_feature_table)
from .protocol import (LogRecord, PerformanceRecord, Slide, StimulusPlan,
                       generate_math_plan, generate_stroop_plan, load_log, load_plan,
                       partition_levels, save_log, save_plan, score_session, split_log)
from .synth import (BvpSpec, EcgSpec, EmgSpec, GsrSpec, HrProfile, SessionProfile,
                    SynthSession, beat_times_from_profile, calm_profile, gen_bvp,
                    gen_ecg, gen_emg, gen_gsr, gen_session, planted_profile,
                    stressed_profile)

__version__ = "0.1.0"
