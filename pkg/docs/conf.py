# Sphinx configuration of the MPC Drone Delivery documentation.
#
# Build with `sphinx-build -b html docs docs/_build/html` from the repository root.
import os
import sys

# the package is imported as `src` from the repository root
sys.path.insert(0, os.path.abspath('..'))

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.napoleon']
autodoc_member_order = 'bysource'

source_suffix = '.rst'
master_doc = 'index'

project = 'MPC Drone Delivery'
version = '0.1'
release = '0.1'

exclude_patterns = ['_build']
pygments_style = 'sphinx'

html_theme = 'default'
htmlhelp_basename = 'mpc_drone_deliverydoc'
