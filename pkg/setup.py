from setuptools import setup, find_packages


install_requires = [
    'numpy>=1.20',
    'scipy>=1.7',
    'networkx>=2.5',
    'pandas>=1.5',
    'gevent',
    'psutil',
]

tests_require = [
    'six',
    'mock',
]

extras = {
    'test': tests_require,
}

setup(
    name='citation-thermo',
    version='0.1.0',
    python_requires='>=3.8',
    package_dir={'': 'src'},
    packages=find_packages('src'),
    url='',
    license='GNU General Public License v3 (GPLv3)',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
        'Natural Language :: English',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering :: Information Analysis',
    ],
    description='Knowledge temperature of temporal citation networks: skeleton trees, '
                'graph entropy, heat diffusion and forest helping',
    install_requires=install_requires,
    tests_require=tests_require,
    extras_require=extras,
    entry_points={
        'console_scripts': [
            'citation-thermo=citation_thermo.cli:main',
        ],
    },
    test_suite='tests'
)
