from setuptools import setup

setup(
    name='laban_guide',
    version='0.1.0',
    packages=['laban_guide', 'laban_guide.benchmarks', 'laban_guide.diffusion', 'laban_guide.guidance'],
    license='MIT License',
    description='Laban-movement-guided sampling for motion diffusion models.',
    author='The laban-guide authors',
    install_requires=['numpy', 'torch', 'matplotlib'],
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['laban-guide=laban_guide.cli:run']},
    include_package_data=True
)
