"""
Robsparse is a package for robust estimation of sparse functionals
(means, covariances, regression and GLM coefficients) from samples
drawn under Huber's epsilon-contamination model.

The pipeline prunes gross outliers, searches the polytope of sample
weights with the ellipsoid method driven by a sparse-PCA separation
oracle, and hard-thresholds the weighted estimate. A contamination
simulator and a sweep harness are included to run experiments.
"""
