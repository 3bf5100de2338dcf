"""Module responsible for evaluating predicted views and layered depth images

Color is compared on the 0-255 scale and depth in meters. Color metrics are computed per channel
and then averaged over channels.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from layeredDepth.errors import DimensionError, EmptyMaskError
from layeredDepth.data_model.raster import RgbadImage
from layeredDepth.data_model.run_config import SsimConfig


COLOR_SCALE = 255.0

# gt rank l counts as novel content where it differs from rank l-1 by more than this, meters
NOVEL_DEPTH_GAP = 1e-6


def _masked_channels(a, b, mask, color):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError('Compared rasters differ in shape: {} and {}'.format(a.shape, b.shape))
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != a.shape[:2]:
        raise DimensionError('Mask {} does not match rasters {}'.format(mask.shape, a.shape))
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise EmptyMaskError('Metric is undefined over an empty mask')
    color = a.ndim == 3 if color is None else color
    scale = COLOR_SCALE if color else 1.0
    diff = (a[mask] * scale - b[mask] * scale).reshape(count, -1)
    return diff, count


def mpe(a, b, mask, color=None):
    """Function that computes the mean pixel error

    Parameters
    ----------
    a, b : np.ndarray
        (height, width, channels) color in [0, 1] or (height, width) depth in meters
    mask : np.ndarray
        bool raster of compared pixels
    color=None : bool
        scale to 0-255 before comparing, defaults to True for multi-channel rasters

    Returns
    -------
    float
        mean absolute error, channels averaged
    """

    diff, count = _masked_channels(a, b, mask, color)
    return float(np.mean(np.abs(diff).sum(axis=0) / count))


def rmse(a, b, mask, color=None):
    """Function that computes the root mean square error, per channel then averaged

    Returns
    -------
    float
        channel mean of the per-channel RMSE
    """

    diff, count = _masked_channels(a, b, mask, color)
    return float(np.mean(np.sqrt((diff * diff).sum(axis=0) / count)))


def _ssim_channel(a, b, config):
    windows_a = sliding_window_view(a, (config.window, config.window))
    windows_b = sliding_window_view(b, (config.window, config.window))
    mu_a = windows_a.mean(axis=(-2, -1))
    mu_b = windows_b.mean(axis=(-2, -1))
    centered_a = windows_a - mu_a[..., None, None]
    centered_b = windows_b - mu_b[..., None, None]
    var_a = (centered_a * centered_a).mean(axis=(-2, -1))
    var_b = (centered_b * centered_b).mean(axis=(-2, -1))
    cov = (centered_a * centered_b).mean(axis=(-2, -1))
    numerator = (2.0 * (mu_a * mu_b) + config.c1) * (2.0 * cov + config.c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + config.c1) * (var_a + var_b + config.c2)
    return float(np.mean(numerator / denominator))


def ssim(a, b, config=None):
    """Function that computes the mean structural similarity of two color images

    Parameters
    ----------
    a, b : np.ndarray
        (height, width, channels) or (height, width) color in [0, 1]
    config=None : SsimConfig
        window and constants, 8x8 uniform window by default

    Returns
    -------
    float
        mean local SSIM over all full windows, channels averaged
    """

    config = SsimConfig() if config is None else config
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError('Compared images differ in shape: {} and {}'.format(a.shape, b.shape))
    if a.shape[0] < config.window or a.shape[1] < config.window:
        raise DimensionError('Image {} is smaller than the {}x{} SSIM window'.format(a.shape[:2], config.window, config.window))
    if a.ndim == 2:
        a = a[..., None]
        b = b[..., None]
    scale = config.dynamic_range
    values = [_ssim_channel(a[..., c] * scale, b[..., c] * scale, config) for c in range(a.shape[-1])]
    return float(np.mean(values))


def _view_metrics(pred, gt, mask):
    return {'color_mpe': mpe(pred.rgb, gt.rgb, mask, color=True),
            'color_rmse': rmse(pred.rgb, gt.rgb, mask, color=True),
            'depth_mpe': mpe(pred.depth, gt.depth, mask, color=False),
            'depth_rmse': rmse(pred.depth, gt.depth, mask, color=False)}


def per_layer_eval(pred, gt, max_layers=None):
    """Function that evaluates an LDI layer by layer with the migration rule

    Where pred has no sample at rank l its content from rank l-1 carries over. Rank 1 is compared
    wherever both hold content, deeper ranks only where the ground truth shows novel content,
    meaning rank l exists and differs in depth from rank l-1.

    Parameters
    ----------
    pred : Ldi
        predicted LDI
    gt : Ldi
        ground-truth LDI
    max_layers=None : int
        number of ranks to evaluate, the deepest ground-truth rank if None

    Returns
    -------
    list of dict
        one entry per rank with its metrics and pixel count, metrics None when no pixel qualifies
    """

    if pred.shape != gt.shape:
        raise DimensionError('Predicted LDI {} and ground truth {} differ in size'.format(pred.shape, gt.shape))
    max_layers = gt.max_layers if max_layers is None else max_layers

    layers = []
    carried = None
    previous_gt = None
    for rank in range(max_layers):
        pred_rank, _ = pred.rank(rank)
        gt_rank, _ = gt.rank(rank)
        if carried is None:
            carried = pred_rank
        else:
            take = pred_rank.valid
            carried = RgbadImage(np.where(take[..., None], pred_rank.rgba, carried.rgba),
                                 np.where(take, pred_rank.depth, carried.depth), take | carried.valid)

        mask = gt_rank.valid & carried.valid
        if previous_gt is not None:
            mask &= np.abs(gt_rank.depth - previous_gt.depth) > NOVEL_DEPTH_GAP
        count = int(np.count_nonzero(mask))
        entry = {'layer': rank + 1, 'pixels': count, 'metrics': None}
        if count:
            entry['metrics'] = _view_metrics(carried, gt_rank, mask)
        layers.append(entry)
        previous_gt = gt_rank
    return layers


def layer_histogram(ldis):
    """Function that measures how often images hold an l-th layer

    Returns
    -------
    list of float
        entry l-1 is the fraction of LDIs with at least one pixel holding l samples
    """

    if len(ldis) == 0:
        return []
    deepest = [ldi.max_layers for ldi in ldis]
    return [sum(1 for d in deepest if d >= layer) / len(ldis) for layer in range(1, max(deepest) + 1)]


class EvalReport:
    """Class that holds the evaluation of one or more predicted views

    Attributes
    ----------
    metrics : dict
        color and depth MPE/RMSE plus color SSIM
    pixels : int
        number of mutually valid pixels compared
    layers : list of dict
        per-layer breakdown
    histogram : list of float
        layer frequency histogram
    ssim_config : SsimConfig
        SSIM parameters used
    views : dict of str -> EvalReport
        per-view reports when aggregated
    """

    METRIC_NAMES = ('color_mpe', 'color_rmse', 'depth_mpe', 'depth_rmse', 'ssim')

    def __init__(self, metrics, pixels, layers, histogram, ssim_config, views=None):
        """Constructor for EvalReport
        """

        self.metrics = {name: metrics[name] for name in EvalReport.METRIC_NAMES}
        self.pixels = int(pixels)
        self.layers = layers
        self.histogram = histogram
        self.ssim_config = ssim_config
        self.views = {} if views is None else views


    def to_dict(self):
        out = {'metrics': {name: self.metrics[name] for name in EvalReport.METRIC_NAMES},
               'pixels': self.pixels,
               'layers': self.layers,
               'histogram': self.histogram,
               'ssim': self.ssim_config.to_dict()}
        if self.views:
            out['views'] = {name: self.views[name].to_dict() for name in sorted(self.views)}
        return out


def evaluate_view(pred_view, gt_view, pred_ldi=None, gt_ldi=None, ssim_config=None):
    """Function that evaluates one predicted view against the ground truth

    Parameters
    ----------
    pred_view, gt_view : RgbadImage
        compared views, metrics restricted to pixels valid in both
    pred_ldi, gt_ldi : Ldi
        optional LDIs for the per-layer breakdown and histogram
    ssim_config=None : SsimConfig
        SSIM parameters

    Returns
    -------
    EvalReport
        evaluation of the view
    """

    ssim_config = SsimConfig() if ssim_config is None else ssim_config
    if pred_view.shape != gt_view.shape:
        raise DimensionError('Predicted view {} and ground truth {} differ in size'.format(pred_view.shape, gt_view.shape))
    mask = pred_view.valid & gt_view.valid
    metrics = _view_metrics(pred_view, gt_view, mask)
    metrics['ssim'] = ssim(pred_view.rgb, gt_view.rgb, ssim_config)

    layers = []
    histogram = []
    if pred_ldi is not None and gt_ldi is not None:
        layers = per_layer_eval(pred_ldi, gt_ldi)
        histogram = layer_histogram([gt_ldi])
    return EvalReport(metrics, int(np.count_nonzero(mask)), layers, histogram, ssim_config)


def aggregate_reports(reports, ldis=None):
    """Function that merges per-view reports into a dataset report

    Metrics and per-layer values are averaged over views, pixel counts summed.

    Parameters
    ----------
    reports : dict of str -> EvalReport
        per-view reports, keyed by view name
    ldis=None : list of Ldi
        ground-truth LDIs for the dataset histogram

    Returns
    -------
    EvalReport
        aggregated report holding the per-view reports
    """

    if len(reports) == 0:
        raise EmptyMaskError('No views to aggregate')
    names = sorted(reports)
    metrics = {name: float(np.mean([reports[view].metrics[name] for view in names])) for name in EvalReport.METRIC_NAMES}
    pixels = sum(reports[view].pixels for view in names)

    depth = max(len(reports[view].layers) for view in names)
    layers = []
    for index in range(depth):
        entries = [reports[view].layers[index] for view in names
                   if index < len(reports[view].layers) and reports[view].layers[index]['metrics'] is not None]
        entry = {'layer': index + 1, 'pixels': sum(e['pixels'] for e in entries), 'metrics': None}
        if entries:
            entry['metrics'] = {key: float(np.mean([e['metrics'][key] for e in entries])) for key in entries[0]['metrics']}
        layers.append(entry)

    histogram = layer_histogram(ldis) if ldis else []
    return EvalReport(metrics, pixels, layers, histogram, reports[names[0]].ssim_config, views=dict(reports))
