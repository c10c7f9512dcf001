'''
gnuplot scripts for the standard figures. Only the scripts are written;
running gnuplot is left to the user.
'''
import logging
import os

from diagnostics.loj import SINGLE_BUBBLE_ENERGY

logger = logging.getLogger(__name__)

HEADER = '''set datafile separator ','
set datafile missing 'nan'
set key autotitle columnhead
set terminal pngcairo size 800,600
'''

FLOW_FIGURES = {
    'energy': '''set output '{stem}_energy.png'
set xlabel 't'
set ylabel 'E'
plot '{data}' using 1:2 with linespoints
''',
    'decay': '''set output '{stem}_decay.png'
set xlabel 'sqrt(t)'
set ylabel 'log(E - E_inf)'
e_inf = {e_inf!r}
plot '{data}' using (sqrt($1)):($2 > e_inf ? log($2 - e_inf) : NaN) with linespoints
''',
    'ratios': '''set output '{stem}_ratios.png'
set xlabel 't'
set logscale y
plot '{data}' using 1:7 with linespoints, '' using 1:8 with linespoints
''',
}

SCAN_FIGURES = {
    'gap': '''set output '{stem}_gap.png'
set xlabel 'lambda'
set ylabel 'E - 4 pi'
set logscale xy
plot '{data}' using 1:3 with linespoints, 8 * pi**2 / x**2 title '8 pi^2 / lambda^2'
''',
}


def _write(path, text):
    with open(path, 'w', newline='\n') as stream:
        stream.write(text)
    logger.info('wrote %s', path)


def write_plot_scripts(directory, stem, flow_csv=None, scan_csv=None, e_inf=None):
    '''
    One script per figure whose data file is given.

    :returns: the list of script paths written.
    '''
    e_inf = SINGLE_BUBBLE_ENERGY if e_inf is None else float(e_inf)
    paths = []
    figures = []
    if flow_csv:
        figures += [(name, template, flow_csv) for name, template in FLOW_FIGURES.items()]
    if scan_csv:
        figures += [(name, template, scan_csv) for name, template in SCAN_FIGURES.items()]
    for name, template, data in figures:
        path = os.path.join(directory, '%s_%s.gp' % (stem, name))
        # data paths are relative to the script directory
        data = os.path.relpath(data, directory)
        _write(path, HEADER + template.format(stem=stem, data=data, e_inf=e_inf))
        paths.append(path)
    return paths
