import runpy
from setuptools import setup, find_packages

__version__ = runpy.run_path('heatobs/__version__.py')['__version__']

requires = [
    "numpy",
    "scipy",
    "h5py",
    "sympy",
    "tqdm"
]

setup(
    name='heatobs',
    packages=find_packages(exclude=['test']),
    version=__version__,
    description='Asymptotic observability and impulse control experiments for the heat equation',
    install_requires=requires,
    license='MIT',
    entry_points={
        "console_scripts": ["heatobs = heatobs.scripts.heatobs_cli:main"]
    },
)
