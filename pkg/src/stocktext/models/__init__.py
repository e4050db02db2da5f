from .artifact import dump_model, load_model
from .logistic import (
    DivergedError,
    LogisticModel,
    LRConfig,
    loss_and_gradient,
    predict_lr,
    stable_step_bound,
    train_lr,
    with_weights,
)
from .naive_bayes import NaiveBayesModel, NBVariant, predict_nb, train_nb
