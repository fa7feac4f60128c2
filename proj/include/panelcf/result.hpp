#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace panelcf {

enum class Method { VR, HZ, MC, EnsVC, EnsHC };

const char* to_string(Method m);
std::optional<Method> method_from_string(const std::string& s);

struct Penalty {
    double lambda = 0.0;
    std::optional<double> mixing;  // empty for the matrix-completion penalty
};

/// One method's imputed value for the target cell. `complexity` is the
/// number of non-zero coefficients (VR/HZ) or the rank (MC); ensembles leave
/// it empty. `diagnostics` holds the coefficient vector (VR/HZ), the retained
/// singular values (MC), or the ensemble weights (VR, HZ, MC order).
struct ImputationResult {
    double value = 0.0;
    Method method = Method::VR;
    std::optional<double> complexity;
    Eigen::VectorXd diagnostics;
    std::optional<Penalty> penalty;
};

}  // namespace panelcf
