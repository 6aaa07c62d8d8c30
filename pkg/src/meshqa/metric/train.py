"""Head training: feature caching, closed-form gradients, Adam, k-fold splits.

Only the head trains (the extractor is frozen), and every quantity involved
is linear in the cached per-patch feature-difference means, so an epoch is a
few small matrix products. Subjective scores are regressed through the target
t = (5 - MOS) / 4, which sends a zero distance to a perfect score.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyDataset, NonFiniteLoss, TooFewModels
from .model import QualityModel, mean_squared_feature_diffs
from .patches import extract_patch_array, patchify


@dataclass
class TrainConfig:
    images_per_batch: int = 4
    patches_per_image: int = 150
    epochs: int = 10
    learning_rate: float = 1e-4
    constant_epochs: int = 5  # flat schedule, then linear decay toward 0
    seed: int = 0

    def __post_init__(self):
        if min(self.images_per_batch, self.patches_per_image, self.epochs) < 1:
            raise ValueError("batch size, patch count and epochs must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")

    def epoch_lr(self, epoch):
        if epoch < self.constant_epochs:
            return self.learning_rate
        decay_span = max(self.epochs - self.constant_epochs, 1)
        return self.learning_rate * (self.epochs - epoch) / decay_span


def mos_to_target(mos):
    return (5.0 - np.asarray(mos, dtype=np.float64)) / 4.0


@dataclass
class FeatureCache:
    """Per-image cached feature-difference means: one (P, C_l) array per layer."""

    diffs: list
    target: float
    model_id: str = ""

    @property
    def n_patches(self):
        return self.diffs[0].shape[0]


def build_feature_cache(extractor, dataset):
    """dataset items: (ref_image, dist_image, mask, mos) or + model_id.

    The first three entries may also be equal-length lists of views; the
    view-independent mode pools the patches of all views into one bag per
    stimulus (pair it with patches_per_image=300).
    """
    if not dataset:
        raise EmptyDataset("no training items")
    cache = []
    for item in dataset:
        ref, dist, mask, mos = item[:4]
        model_id = item[4] if len(item) > 4 else ""
        if not isinstance(ref, (list, tuple)):
            ref, dist, mask = [ref], [dist], [mask]
        per_view = []
        for view_ref, view_dist, view_mask in zip(ref, dist, mask):
            patch_set = patchify(view_ref, view_mask)
            ref_batch = extract_patch_array(view_ref, patch_set)
            dist_batch = extract_patch_array(view_dist, patch_set)
            per_view.append(
                mean_squared_feature_diffs(extractor, ref_batch, dist_batch)
            )
        diffs = [
            np.concatenate([view[li] for view in per_view], axis=0)
            for li in range(len(per_view[0]))
        ]
        cache.append(FeatureCache(diffs, float(mos_to_target(mos)), model_id))
    return cache


def _sample_patch_indices(n_patches, n_wanted, rng):
    # every patch is seen; repeats fill up short images
    if n_patches >= n_wanted:
        return rng.choice(n_patches, size=n_wanted, replace=False)
    reps = -(-n_wanted // n_patches)
    idx = np.tile(np.arange(n_patches), reps)[:n_wanted]
    return rng.permutation(idx)


def loss_and_gradients(batch_means, targets, weights, scales):
    """Mean squared error over batch images and its head gradients.

    batch_means: per layer, (B, C_l) -- the sampled-patch mean diff of each
    image. The predicted distance of image i is sum_l w0_l (mean_l[i] . w_l).
    """
    targets = np.asarray(targets, dtype=np.float64)
    b = targets.shape[0]
    pred = np.zeros(b)
    layer_dots = []
    for m, w, w0 in zip(batch_means, weights, scales):
        dot = m @ w
        layer_dots.append(dot)
        pred += w0 * dot
    residual = pred - targets
    loss = float((residual**2).mean())
    coeff = 2.0 * residual / b
    grad_w = [w0 * (m.T @ coeff) for m, w0 in zip(batch_means, scales)]
    grad_scales = np.array([float(coeff @ dot) for dot in layer_dots])
    return loss, grad_w, grad_scales


class _Adam:
    def __init__(self, shapes, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g**2
            m_hat = self.m[i] / (1 - self.beta1**self.t)
            v_hat = self.v[i] / (1 - self.beta2**self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train(dataset, config, extractor=None, feature_cache=None):
    """Fit the head on (ref, dist, mask, MOS) items; returns the final model.

    Head weights start at zero with unit scales and are projected back to
    >= 0 after every step. model.history carries the per-epoch mean loss.
    """
    if extractor is None:
        from .extractor import ConvStackExtractor

        extractor = ConvStackExtractor.seeded(config.seed)
    if feature_cache is None:
        feature_cache = build_feature_cache(extractor, dataset)
    if not feature_cache:
        raise EmptyDataset("no training items")

    n_layers = len(extractor.channels)
    model = QualityModel.zero_init(extractor)
    params = [w for w in model.weights] + [model.scales]
    optimizer = _Adam([p.shape for p in params], config.learning_rate)
    rng = np.random.default_rng(config.seed)
    history = []

    n_images = len(feature_cache)
    for epoch in range(config.epochs):
        optimizer.lr = config.epoch_lr(epoch)
        order = rng.permutation(n_images)
        epoch_losses = []
        for start in range(0, n_images, config.images_per_batch):
            batch = order[start : start + config.images_per_batch]
            batch_means = [np.empty((len(batch), c)) for c in extractor.channels]
            targets = np.empty(len(batch))
            for bi, img_idx in enumerate(batch):
                item = feature_cache[img_idx]
                idx = _sample_patch_indices(item.n_patches, config.patches_per_image, rng)
                for li in range(n_layers):
                    batch_means[li][bi] = item.diffs[li][idx].mean(axis=0)
                targets[bi] = item.target
            loss, grad_w, grad_scales = loss_and_gradients(
                batch_means, targets, model.weights, model.scales
            )
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"epoch {epoch}, batch at {start}: loss={loss}, lr={optimizer.lr}"
                )
            optimizer.step(params, grad_w + [grad_scales])
            for w in model.weights:
                np.maximum(w, 0.0, out=w)
            np.maximum(model.scales, 0.0, out=model.scales)
            epoch_losses.append(loss)
        history.append(float(np.mean(epoch_losses)))

    # re-wrap so the weights land on the float32 storage grid
    final = QualityModel(extractor, model.weights, model.scales)
    final.history = history
    return final


def kfold_split(model_ids, k=5, seed=0):
    """Partition unique source models into k folds of (train_ids, test_ids)."""
    unique = sorted(set(model_ids))
    if k < 2:
        raise TooFewModels("need k >= 2 to keep a held-out side")
    if k > len(unique):
        raise TooFewModels(f"cannot split {len(unique)} models into {k} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(unique))
    folds = [[] for _ in range(k)]
    for pos, idx in enumerate(order):
        folds[pos % k].append(unique[idx])
    splits = []
    for i in range(k):
        test = sorted(folds[i])
        train_ids = sorted(m for j, fold in enumerate(folds) if j != i for m in fold)
        splits.append((train_ids, test))
    return splits
