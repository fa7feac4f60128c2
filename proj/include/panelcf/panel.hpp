#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "panelcf/errors.hpp"

namespace panelcf {

enum class OutcomeTransform { Level, Log, Growth };

const char* to_string(OutcomeTransform t);
std::optional<OutcomeTransform> transform_from_string(const std::string& s);

/// Balanced N x T outcome panel. Rows are units, columns are time periods in
/// chronological order. Immutable by convention: nothing in the library
/// mutates a Panel after construction.
struct Panel {
    Eigen::MatrixXd values;                 // N x T, all finite
    std::vector<std::string> unit_labels;   // size N
    std::vector<std::string> period_labels; // size T, strictly increasing in time
    OutcomeTransform transform = OutcomeTransform::Level;

    Eigen::Index n_units() const { return values.rows(); }
    Eigen::Index n_periods() const { return values.cols(); }

    std::optional<Eigen::Index> unit_index(const std::string& label) const;
    std::optional<Eigen::Index> period_index(const std::string& label) const;
};

using VisibleMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct CellRef {
    Eigen::Index unit = 0;
    Eigen::Index period = 0;
};

/// A Panel plus an observation pattern. Estimators may read only cells with
/// visible(i, t) == true; the target cell is always hidden.
struct MaskedPanel {
    Panel panel;
    VisibleMask visible;
    CellRef target;

    Eigen::Index n_units() const { return panel.n_units(); }
    Eigen::Index n_periods() const { return panel.n_periods(); }
};

enum class PanelFormat { Long, Wide };

/// Reads a panel from CSV. Long format has header `unit,period,value`; wide
/// format has header `unit,<p1>,<p2>,...`. Units are ordered by first
/// appearance, periods sorted chronologically (numeric if every label parses
/// as an integer, lexicographic otherwise, which orders ISO dates correctly).
Panel load_panel(std::istream& in, PanelFormat format);
Panel load_panel_file(const std::string& path, PanelFormat format);

/// Writes the long-format CSV (unit,period,value), values with 17 significant
/// digits so output is byte-stable for a given panel.
void write_panel_csv(std::ostream& out, const Panel& panel);

/// Level is the identity, log is the elementwise natural log, growth is the
/// percent change 100*(Y_t - Y_{t-1})/Y_{t-1} (consumes the first period).
Panel transform(const Panel& panel, OutcomeTransform kind);

/// Returns the masked view used by every evaluation task: columns 0..period
/// of `panel` with exactly (unit, period) hidden. Indices are 0-based; period
/// must be >= 1 so at least one earlier period exists.
MaskedPanel restrict(const Panel& panel, Eigen::Index unit, Eigen::Index period);

}  // namespace panelcf
