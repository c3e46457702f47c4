//! File formats for fields, partitions, coefficients and reports.
