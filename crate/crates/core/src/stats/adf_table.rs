// Generated by tools/adf_table.py; do not edit by hand.

/// (statistic, lower-tail probability) knots of the constant-case
/// Dickey-Fuller t distribution, statistic ascending.
pub(crate) const DF_CONST_QUANTILES: [(f64, f64); 125] = [
    (-5.648202, 1e-06),
    (-5.172559, 1e-05),
    (-4.819057, 5e-05),
    (-4.659962, 0.0001),
    (-4.441951, 0.00025),
    (-4.270231, 0.0005),
    (-4.091588, 0.001),
    (-3.904773, 0.002),
    (-3.791071, 0.003),
    (-3.708148, 0.004),
    (-3.642417, 0.005),
    (-3.587729, 0.006),
    (-3.519508, 0.0075),
    (-3.429290, 0.01),
    (-3.297291, 0.015),
    (-3.199735, 0.02),
    (-3.121535, 0.025),
    (-3.055823, 0.03),
    (-2.998871, 0.035),
    (-2.948422, 0.04),
    (-2.903002, 0.045),
    (-2.861593, 0.05),
    (-2.823460, 0.055),
    (-2.788058, 0.06),
    (-2.754966, 0.065),
    (-2.723858, 0.07),
    (-2.694471, 0.075),
    (-2.666591, 0.08),
    (-2.640045, 0.085),
    (-2.614685, 0.09),
    (-2.590389, 0.095),
    (-2.567052, 0.1),
    (-2.522906, 0.11),
    (-2.481663, 0.12),
    (-2.442871, 0.13),
    (-2.406179, 0.14),
    (-2.371304, 0.15),
    (-2.338016, 0.16),
    (-2.306125, 0.17),
    (-2.275474, 0.18),
    (-2.245929, 0.19),
    (-2.217375, 0.2),
    (-2.189714, 0.21),
    (-2.162860, 0.22),
    (-2.136740, 0.23),
    (-2.111288, 0.24),
    (-2.086445, 0.25),
    (-2.062160, 0.26),
    (-2.038386, 0.27),
    (-2.015081, 0.28),
    (-1.992208, 0.29),
    (-1.969732, 0.3),
    (-1.947623, 0.31),
    (-1.925850, 0.32),
    (-1.904387, 0.33),
    (-1.883211, 0.34),
    (-1.862298, 0.35),
    (-1.841626, 0.36),
    (-1.821176, 0.37),
    (-1.800930, 0.38),
    (-1.780869, 0.39),
    (-1.760978, 0.4),
    (-1.741239, 0.41),
    (-1.721638, 0.42),
    (-1.702160, 0.43),
    (-1.682791, 0.44),
    (-1.663519, 0.45),
    (-1.644328, 0.46),
    (-1.625208, 0.47),
    (-1.607152, 0.48),
    (-1.587240, 0.49),
    (-1.567292, 0.5),
    (-1.547293, 0.51),
    (-1.527231, 0.52),
    (-1.507092, 0.53),
    (-1.486862, 0.54),
    (-1.466527, 0.55),
    (-1.446073, 0.56),
    (-1.425483, 0.57),
    (-1.404743, 0.58),
    (-1.383837, 0.59),
    (-1.362746, 0.6),
    (-1.341455, 0.61),
    (-1.319942, 0.62),
    (-1.298190, 0.63),
    (-1.276176, 0.64),
    (-1.253879, 0.65),
    (-1.231274, 0.66),
    (-1.208335, 0.67),
    (-1.185035, 0.68),
    (-1.161343, 0.69),
    (-1.137228, 0.7),
    (-1.112652, 0.71),
    (-1.087578, 0.72),
    (-1.061963, 0.73),
    (-1.035758, 0.74),
    (-1.008912, 0.75),
    (-0.981365, 0.76),
    (-0.953053, 0.77),
    (-0.923900, 0.78),
    (-0.893822, 0.79),
    (-0.862724, 0.8),
    (-0.830495, 0.81),
    (-0.797006, 0.82),
    (-0.762108, 0.83),
    (-0.725625, 0.84),
    (-0.687346, 0.85),
    (-0.647019, 0.86),
    (-0.604333, 0.87),
    (-0.558905, 0.88),
    (-0.510254, 0.89),
    (-0.457755, 0.9),
    (-0.400591, 0.91),
    (-0.337651, 0.92),
    (-0.267372, 0.93),
    (-0.187459, 0.94),
    (-0.094334, 0.95),
    (0.018055, 0.96),
    (0.161208, 0.97),
    (0.361582, 0.98),
    (0.708195, 0.99),
    (0.856811, 0.9925),
    (1.075277, 0.995),
    (1.493466, 0.9975),
    (2.378837, 0.999),
];
