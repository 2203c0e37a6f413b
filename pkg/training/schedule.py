"""
Learning-Rate Schedule
Constant, then linear decay to the final rate.
"""


def lr_schedule(epoch: float, cfg) -> float:
    """
    Learning rate for an epoch.

    Args:
        epoch: 0 <= epoch <= cfg.total_epochs
        cfg: object with lr_initial, lr_final, decay_start_epoch and total_epochs

    Returns:
        lr_initial before decay_start_epoch, then linear interpolation reaching
        lr_final at total_epochs
    """
    start, end = cfg.decay_start_epoch, cfg.total_epochs
    if epoch <= start or end <= start:
        return cfg.lr_initial
    progress = min(1.0, (epoch - start) / (end - start))
    return cfg.lr_initial + (cfg.lr_final - cfg.lr_initial) * progress
