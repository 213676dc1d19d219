# fuelgen documentation build configuration file.
#
# Only the values that differ from the sphinx defaults are set here.

import os
import sys

# make the package importable without installing it
sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, os.pardir))

on_rtd = os.environ.get('READTHEDOCS', None) == 'True'

from fuelgen import __version__  # noqa: E402

extensions = ['sphinx.ext.autodoc']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'fuelgen'
copyright = '2026, the fuelgen developers'

version = __version__
release = __version__

exclude_patterns = []
pygments_style = 'sphinx'

# autodoc would otherwise list namedtuple field accessors on every value type
autodoc_default_options = {'undoc-members': False}

if not on_rtd:
    # Try to use the ReadTheDocs theme if installed.
    # Default to the default alabaster theme if not.
    try:
        import sphinx_rtd_theme
        html_theme = 'sphinx_rtd_theme'
        html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
    except ImportError:
        html_theme = 'alabaster'
else:
    html_theme = 'default'

htmlhelp_basename = 'fuelgendoc'

latex_documents = [
    ('index', 'fuelgen.tex', 'fuelgen Documentation', 'the fuelgen developers', 'manual'),
]

man_pages = [
    ('index', 'fuelgen', 'fuelgen Documentation', ['the fuelgen developers'], 1),
]
