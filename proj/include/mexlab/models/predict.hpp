#pragma once

#include "mexlab/core/metrics.hpp"
#include "mexlab/models/models.hpp"

namespace mexlab {

double sigmoid(double t);
// Inverse sigmoid with p clipped to [clip, 1 - clip].
double logit(double p, double clip = 1e-12);

ProbVector softmax(const std::vector<double>& z);

// Per-class linear/kernel scores before the output non-linearity.
std::vector<double> class_scores(const ModelSpec& m, const Point& x);

// Throws std::invalid_argument for SVMs, which expose no probabilities.
ProbVector predict_proba(const ModelSpec& m, const Point& x);
int predict_class(const ModelSpec& m, const Point& x);

bool supports_proba(const ModelSpec& m);

// Halting node for a (possibly partial) query: the first node that splits on
// a MISSING feature, or the leaf reached.
int tree_traverse(const DecisionTree& t, const PartialQuery& x);

// Class distribution reported when computation halts at node.
ProbVector node_distribution(const DecisionTree& t, int node);

Predictor as_predictor(const ModelSpec& m);

}  // namespace mexlab
