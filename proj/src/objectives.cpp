#include "calm/objectives.hpp"

namespace calm {

ObjectiveKind parse_objective(const std::string& name) {
    if (name == "golem-nv") return ObjectiveKind::golem_nv;
    if (name == "least-squares") return ObjectiveKind::least_squares;
    if (name == "colide-nv") return ObjectiveKind::colide_nv;
    throw InvalidArgument("unknown objective: " + name);
}

std::string to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::golem_nv: return "golem-nv";
        case ObjectiveKind::least_squares: return "least-squares";
        case ObjectiveKind::colide_nv: return "colide-nv";
    }
    return "?";
}

ObjectiveValue<double> least_squares_loss(const WeightedAdjacency& b, const CovarianceInput& input) {
    const Matrix sigma = input.covariance();
    if ((sigma.diagonal().array() <= 0.0).any()) throw DomainError("least_squares_loss: zero variance column");
    return least_squares_loss(b, sigma);
}

}  // namespace calm
