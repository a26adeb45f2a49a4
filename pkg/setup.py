# Basic setup.py to support testing and installation.
#
# Supports:
# - python setup.py install
# - python setup.py test
#
# Does not support:
# - python setup.py version

import os, glob, re
from setuptools import setup, find_packages

def _get_version():
    for line in open('py/mrtapf/__init__.py').readlines():
        m = re.match("__version__\s*=\s*'(.*)'", line)
        if m is not None:
            version = m.groups()[0]
            break
    else:
        print('ERROR: Unable to parse version from: {}'.format(line))
        version = 'unknown'

    return version

def _get_requirements():
    requirements = list()
    for line in open('requirements.txt').readlines():
        line = line.strip()
        if line and not line.startswith('#'):
            requirements.append(line)
    return requirements

#- Basic info
setup_keywords = dict(
    name='mrtapf',
    version=_get_version(),
    description='Multi-robot task assignment and path finding with simulated annealing and recurrent CBS',
    license='BSD',
    python_requires='>=3.7',
)

setup_keywords['zip_safe'] = False

#- What to install
setup_keywords['packages'] = find_packages('py')
setup_keywords['package_dir'] = {'':'py'}
setup_keywords['install_requires'] = _get_requirements()
setup_keywords['extras_require'] = {'mpi': ['mpi4py']}

#- Treat everything in bin/ as a script to be installed
setup_keywords['scripts'] = glob.glob(os.path.join('bin', '*'))

#- Testing
setup_keywords['test_suite'] = 'mrtapf.test.test_suite'

#- Go!
setup(**setup_keywords)
