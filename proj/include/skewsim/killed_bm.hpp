#pragma once

namespace skewsim::killed {

/// Brownian motion started at u in (0, L), killed on leaving (0, L).
/// Small times use the method of images, large times the sine expansion; the switch is at
/// t / h^2 = 0.5 with h = L/2. Series are truncated once terms drop below 1e-16 and a
/// NumericalError is raised if that does not happen within the term budget.
enum class Form { automatic, images, eigen };

/// P_u[tau > t].
double survival(double t, double u, double L, Form form = Form::automatic);
/// P_u[tau <= t, B_tau = L].
double right_exit_cdf(double t, double u, double L, Form form = Form::automatic);
/// P_u[tau <= t, B_tau = 0].
double left_exit_cdf(double t, double u, double L, Form form = Form::automatic);
/// P_u[tau > t, B_t <= v] for v in [0, L].
double killed_cdf(double t, double u, double v, double L, Form form = Form::automatic);

}  // namespace skewsim::killed
