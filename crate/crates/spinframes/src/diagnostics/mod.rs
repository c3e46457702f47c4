//! Empirical verification scans: localization, compact support, tightness.
