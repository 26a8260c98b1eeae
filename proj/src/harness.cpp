#include "oblv/harness.hpp"

#include "oblv/hsic.hpp"
#include "oblv/rng.hpp"

namespace oblv {

double hsic_against_labels(const Eigen::Ref<const Matrix>& repr, const std::vector<int>& labels,
                           int num_classes, Index rff_dim, std::uint64_t seed) {
    KernelSpec spec;
    spec.family = KernelFamily::RBF;
    spec.rff_dim = rff_dim;
    spec.seed = seed;
    try {
        FeatureMatrix phi = rff_features(make_rff_map(spec, repr), repr);
        return hsic_feature(phi, one_hot_features(labels, num_classes)).value;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::AllRowsIdentical) return 0.0;  // constant representation
        throw;
    }
}

Evaluator make_probe_evaluator(const EvaluatorConfig& config) {
    return [config](const EvalInput& in) -> TradeoffRecord {
        TradeoffRecord rec;
        rec.step = in.step;
        rec.dim = in.train_repr.cols();
        rec.chance_s = random_chance(in.s_test);

        ProbeData s_train{in.train_repr, in.s_train, in.s_classes};
        ProbeData s_test{in.test_repr, in.s_test, in.s_classes};
        ProbeReport s_report =
            probe_max(s_train, s_test, config.probes, derive_seed(in.seed, 0x73), config.jobs);
        rec.s_acc_test_max = s_report.max_test_acc;
        rec.s_acc_train_max = s_report.max_train_acc;

        if (in.y_train && in.y_test) {
            rec.chance_y = random_chance(*in.y_test);
            ProbeData y_train{in.train_repr, *in.y_train, in.y_classes};
            ProbeData y_test{in.test_repr, *in.y_test, in.y_classes};
            rec.y_acc_test =
                mlp_classify(y_train, y_test, config.probes.mlp, derive_seed(in.seed, 0x79))
                    .test_acc;
        }

        rec.hsic_s = hsic_against_labels(in.train_repr, in.s_train, in.s_classes, config.hsic_dim,
                                         derive_seed(in.seed, 0x68));
        return rec;
    };
}

}  // namespace oblv
