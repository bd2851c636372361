from setuptools import find_packages, setup

setup(
    name='src',
    packages=find_packages(exclude=['tests', 'tests.*']),
    version='0.1.0',
    description='Multi-drone delivery planning: MPC fleet selection compared with tabular '
                'multi-agent reinforcement learning baselines.',
    author='y',
    license='MIT',
    install_requires=[
        'numpy>=1.19',
        'pandas>=1.5',
        'click>=8.0',
        'python-dotenv>=0.15.0',
        'pyyaml>=5.3.1',
    ],
    entry_points={'console_scripts': ['drone-delivery=src.cli:run']},
)
